#pragma once

// Nonlinear residual functionals of a deformation field (G-deformation
// residual and the preserved-quantity residual of each kind), their
// linearization at a given field, and the Riemann-Hilbert boundary data.
//
// Unknown layout: node-interleaved (a1, a2, c), index 3p + f.
// Interior row layout: node-interleaved (G1, G2, I), index 3p + r.

#include "rdeform/surface.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rdeform {

// Ch: sum of principal radii 2H/K; H: mean curvature; A: area element sqrt(g);
// K: Gauss curvature.
enum class DeformationKind { Ch, H, A, K };

std::string to_string(DeformationKind kind);
// Accepts "Ch", "H", "A", "K" (case-insensitive); throws ConfigError.
DeformationKind parse_kind(const std::string& name);

// The preserved quantity of `kind` at one point.
double invariant_value(DeformationKind kind, const PointForms& pf);

// Everything the residual functionals need about the base surface.
struct BaseSurface {
    const Immersion* immersion = nullptr;
    const FundamentalForms* forms = nullptr;
    const MetricField* metric = nullptr;
    int transport_substeps = 32;

    const PolarGrid& grid() const { return *immersion->grid; }
    int num_nodes() const { return immersion->num_nodes(); }
};

// Per-node residual: (G1, G2) components of (transported base normal −
// deformed normal) against the deformed tangents, scaled by the base tangent
// lengths, and the relative change of the kind's invariant.
struct NodeResidual {
    double g1 = 0.0, g2 = 0.0, inv = 0.0;
};

// Transported base normal from y to y + z (parallel transport along the
// straight segment).
Vec3 transported_normal(const BaseSurface& base, int node, const Vec3& z);

NodeResidual node_residual(const BaseSurface& base, DeformationKind kind, int node, const FieldJet& f);
// Same, with the transported normal supplied (it depends on field values only).
NodeResidual node_residual(const BaseSurface& base, DeformationKind kind, int node, const FieldJet& f,
                           const Vec3& n_transported);

// Stacked interior residual (3 per node, interleaved) of a full field.
std::vector<double> full_residual(const BaseSurface& base, DeformationKind kind, const DeformationField& field);
std::vector<double> full_residual_serial(const BaseSurface& base, DeformationKind kind,
                                         const DeformationField& field);

// Per-point G residual (g1, g2) of a field.
std::vector<std::array<double, 2>> g_residual(const BaseSurface& base, const DeformationField& field);

// Raw change of the kind's quantity between two sets of forms (no
// normalization): ΔH, Δ(2H/K), Δ(sqrt g) or ΔK. Throws AdmittanceError if the
// deformed forms are not admitted.
std::vector<double> invariant_residual(DeformationKind kind, const FundamentalForms& base,
                                       const FundamentalForms& deformed);

// Per-node Jacobian of the node residual with respect to the 18 field-jet
// components (3 rows: G1, G2, I; column 6 f + k).
using NodeJacobian = std::array<std::array<double, 18>, 3>;

// Central-difference jet Jacobians at `field` (zero field when null).
std::vector<NodeJacobian> jet_jacobians(const BaseSurface& base, DeformationKind kind,
                                        const DeformationField* field = nullptr, double step = 1e-4);
std::vector<NodeJacobian> jet_jacobians_serial(const BaseSurface& base, DeformationKind kind,
                                               const DeformationField* field = nullptr, double step = 1e-4);

// Sparse interior operator L = Σ diag(J[., k]) · jet_op(k) (3N × 3N).
SparseMatrix compose_interior(const PolarGrid& grid, const std::vector<NodeJacobian>& jac);

// ------------------------------------------------------------ boundary data

// Truncated Fourier series f(θ) = Σ_k cos_k cos(kθ) + sin_k sin(kθ), k >= 0.
struct FourierSeries {
    std::vector<double> cos_coef, sin_coef;

    double operator()(double theta) const;
    bool is_zero() const;
};

struct BoundaryData {
    FourierSeries l1, l2;     // tangent coefficients l^i(θ)
    FourierSeries gamma_rate; // boundary rate γ̇(θ)
};

struct BoundaryCondition {
    std::vector<int> nodes;                       // boundary ring nodes in θ order
    std::vector<double> theta;
    std::vector<std::array<double, 2>> l;         // l^i per node
    std::vector<Vec3> v;                          // v = l^i y_{,i}
    std::vector<std::array<double, 2>> lambda_tilde;
    std::vector<std::complex<double>> lambda;     // unit-modulus RH coefficient λ1 − iλ2
    std::vector<double> gamma_rate;
    std::vector<double> phi_rate;                 // γ̇ / |λ̃|
    int index = 0;
};

// Samples l and γ̇ on the boundary ring and forms λ̃, λ, φ̇ and the index.
// The complex coefficient pairs with ω = ȧ1 − iȧ2, i.e. λ = (λ̃1 − iλ̃2)/|λ̃|
// so that Re(conj(λ) ω) = (λ̃_k ȧ^k)/|λ̃|. Throws NumericalError when |λ̃|
// vanishes.
BoundaryCondition boundary_coefficients(const Immersion& im, const MetricField& metric, const BoundaryData& data);

// λ̃ samples supplied directly (for calibration); same conventions.
BoundaryCondition boundary_from_lambda_tilde(const PolarGrid& grid,
                                             const std::vector<std::array<double, 2>>& lambda_tilde);

// ------------------------------------------------------------ linear system

struct LinearSystem {
    std::shared_ptr<const PolarGrid> grid;
    DeformationKind kind = DeformationKind::H;
    std::vector<NodeJacobian> jacobians;
    SparseMatrix interior; // 3N × 3N
    std::vector<double> interior_rhs;
    std::optional<BoundaryCondition> bc;
    SparseMatrix boundary; // Nθ × 3N, rows (λ̃_k/|λ̃|) ȧ^k
    std::vector<double> boundary_rhs;
    std::optional<int> fix_point;
    SparseMatrix constraint; // 3 × 3N when fix_point is set
    std::vector<double> constraint_rhs;

    int num_unknowns() const { return 3 * grid->num_nodes(); }
};

struct AssemblyOptions {
    double step = 1e-4;     // jet perturbation size
    bool require_conjugate_isothermal = true;
    double isothermal_tol = 1e-8;
};

// Linearization at `field` (zero when null). Throws AdmittanceError if the
// base is not conjugate-isothermal; NumericalError if the frame at the fix
// point is ill conditioned.
LinearSystem assemble_linear_system(const BaseSurface& base, DeformationKind kind,
                                    const std::optional<BoundaryCondition>& bc, std::optional<int> fix_point,
                                    const AssemblyOptions& opts = {}, const DeformationField* field = nullptr);

// Rate fields of the three ambient translations e_σ in frame components.
std::array<DeformationField, 3> translation_fields(const BaseSurface& base);

// Stack a field into the interleaved unknown vector and back.
std::vector<double> stack_field(const DeformationField& f);
DeformationField unstack_field(const std::vector<double>& x);

// Remainder of the linearization along a direction d: for each scale s the
// norm ‖R(s d) − s L d‖ of the stacked interior residual, and the slope of a
// log-log least-squares fit (second order when the linearization is right).
struct ExpansionCheck {
    std::vector<double> scales;
    std::vector<double> remainder;
    double fitted_order = 0.0;
};
ExpansionCheck remainder_check(const BaseSurface& base, DeformationKind kind, const LinearSystem& sys,
                               const DeformationField& direction, const std::vector<double>& scales);

} // namespace rdeform
