#pragma once

// Integration of deformations in the parameter t (rates from the linearized
// boundary-value problem, accumulated displacement, invariant drift), and the
// closed-surface formulation glued from two disk charts.

#include "rdeform/rhsolver.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace rdeform {

// ------------------------------------------------------------ closed surface

// Two disk charts F+ and F- with a shared boundary ring; seam_plus[j] and
// seam_minus[j] are boundary nodes of the same surface point.
struct ClosedSurface {
    std::shared_ptr<const PolarGrid> grid;
    Immersion plus, minus;
    FundamentalForms plus_forms, minus_forms;
    std::vector<int> seam_plus, seam_minus;

    // Max ambient distance between corresponding seam nodes.
    double seam_mismatch() const;
};

// Pairs the boundary rings of two charts by position. Throws NumericalError
// when some boundary node has no partner within `tol`; AdmittanceError when a
// chart is not admitted.
ClosedSurface make_closed_surface(Immersion plus, Immersion minus, const MetricField& metric, double tol = 1e-10);

// Sphere of `radius` from the South and North stereographic charts (the North
// chart has x2 reflected so both charts are positively oriented outward).
ClosedSurface two_chart_sphere(double radius, std::shared_ptr<const PolarGrid> grid, const MetricField& metric);

// Joint system over both charts (unknowns of F+ first). Seam rows match the
// ambient rate vectors z' = a^j y_{,j} + c n and their derivatives along the
// seam; no boundary-data rows. `fix_point` pins the rate at a node of F+.
RHSystem glue_closed_system(const ClosedSurface& cs, DeformationKind kind, const MetricField& metric,
                            std::optional<int> fix_point, const AssemblyOptions& opts = {});

// Translation rate fields stacked over both charts (F+ then F-).
std::array<std::vector<double>, 3> closed_translation_fields(const ClosedSurface& cs, const MetricField& metric);

// ------------------------------------------------------------ evolution

struct EvolutionDiagnostics {
    double t = 0.0;
    double drift = 0.0;        // max relative change of the kind's invariant
    double mean_drift = 0.0;   // area-weighted mean |relative change|
    double g_residual = 0.0;   // max |G residual|
    int kernel_dim = 0;
    double gap_ratio = 0.0;
    double rate_norm = 0.0;    // max |rate| over nodes
    double data_norm = 0.0;    // max |γ̇| on the boundary
};

struct EvolutionState {
    double t = 0.0;
    DeformationField field; // accumulated displacement in base frame components
    std::vector<EvolutionDiagnostics> history;
};

struct EvolutionProblem {
    const BaseSurface* base = nullptr;
    DeformationKind kind = DeformationKind::H;
    BoundaryData boundary;            // l^i and γ̇ at t = 0
    FourierSeries gamma_rate_slope;   // γ̇(t) = γ̇(0) + t · slope
    std::optional<int> fix_point;
    std::vector<double> kernel_coeffs; // steering coefficients, one per kernel field
    SolveOptions solve;
    // Cap on max|γ̇|; negative selects the default 0.1 · min H · mean |λ̃|.
    double smallness_budget = -1.0;
};

// Default smallness budget for a base surface and boundary field.
double default_smallness_budget(const BaseSurface& base, const BoundaryCondition& bc);

EvolutionState initial_state(const BaseSurface& base);

// One explicit step: linearize at the current field, solve for the rate
// (particular + Σ coeffs · kernel, kernel fields scaled to unit max-norm),
// advance z by dt and append diagnostics. Throws NumericalError naming the
// step when γ̇ exceeds the smallness budget, IndeterminateError on a
// missing spectral gap, AdmittanceError if the surface leaves admittance.
EvolutionState step(const EvolutionProblem& problem, const EvolutionState& state, double dt);

// Steps from t = 0 to t0 (the last step is shortened to land on t0).
// `on_step` (optional) observes every state.
EvolutionState run(const EvolutionProblem& problem, double t0, double dt,
                   const std::function<void(const EvolutionState&)>& on_step = {});

// Invariant drift and G residual of a displacement field relative to the base.
EvolutionDiagnostics measure(const BaseSurface& base, DeformationKind kind, const DeformationField& field);

} // namespace rdeform
