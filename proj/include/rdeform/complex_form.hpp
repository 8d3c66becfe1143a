#pragma once

// Reduction of the linearized deformation system to the complex
// Riemann-Hilbert form
//
//     ∂z̄ω + Aω + Bω̄ + e·ċ = Ψ in D,   Re(conj(λ) ω) = φ̇ on ∂D,
//
// with ω = ȧ¹ − iȧ² (so 2∂z̄ω = div ȧ + i curl ȧ, curl ȧ = ∂₂ȧ¹ − ∂₁ȧ²).
//
// Working pointwise in jet space: the G rows are normalized so that ∂ᵢċ
// enters G_i with unit coefficient and differentiated once; the six rows
// {G_i, ∂_j G_i} determine the five derivatives of ċ up to second order, so
// their one-dimensional left null combination is the compatibility (curl)
// equation and the invariant row with those derivatives substituted is the
// divergence equation. What remains of ċ is its value, reported as the
// coupling coefficient e. A 2×2 row mixing is then fitted so the derivative
// part matches ∂z̄ω exactly; whatever the fit cannot represent is reported
// as the structural residual.

#include "rdeform/linearize.hpp"
#include "rdeform/rhsolver.hpp"

#include <string>
#include <vector>

namespace rdeform {

struct ComplexFormReport {
    bool available = false;  // false: the joint real formulation must be used
    std::string reason;      // why the elimination was refused
    std::vector<Complex> A, B, E, Psi; // per node (E: coefficient of ċ)
    // Named coefficients of the real equations
    //   ∂₂ȧ¹ − ∂₁ȧ² + p_k ȧ^k = Ψ̇₁,   ∂₁ȧ¹ + ∂₂ȧ² + q_k ȧ^k − q₀ ċ = Ψ̇₂.
    std::vector<std::array<double, 2>> p, q;
    std::vector<double> q0;
    std::vector<double> fit_residual; // per node, relative to the ∂z̄ part
    double max_fit_residual = 0.0;
    double min_pivot = 0.0;           // smallest relative elimination pivot
    std::vector<Complex> lambda;      // boundary coefficient (θ order)
    std::vector<double> phi_rate;
};

struct ComplexFormOptions {
    double pivot_threshold = 1e-8; // relative; below it ċ is not eliminable
};

ComplexFormReport to_complex_form(const LinearSystem& sys, const ComplexFormOptions& opts = {});

} // namespace rdeform
