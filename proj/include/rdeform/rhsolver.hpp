#pragma once

// Discretized Riemann-Hilbert / Vekua boundary-value problems: the stacked
// least-squares system, its solution with kernel detection, the boundary
// index, and the calibration (generalized analytic function) builder.

#include "rdeform/linearize.hpp"
#include "rdeform/polar_grid.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rdeform {

using Complex = std::complex<double>;

// Winding number of λ around ∂D by phase unwrapping. Throws
// IndeterminateError ("increase N_theta") when a phase step reaches π/2, and
// NumericalError when |λ| < 1e-12 somewhere.
int compute_index(const std::vector<Complex>& lambda);

enum class RowWeighting {
    Unit,     // rows as assembled
    Area,     // interior rows × sqrt(cell area), boundary rows × sqrt(arc length)
    Balanced, // interior rows × ℓ^order with ℓ the local mesh scale
    Equilibrated, // every row scaled to unit 2-norm
};

// Unknown scaling of the deformation system: with Cell, every unknown is
// multiplied by sqrt(control-cell area) and c additionally by the local mesh
// scale ℓ, which balances the orders of the a- and c-blocks of the operator.
enum class ColumnScaling { None, Cell };

struct RowRange {
    int begin = 0, end = 0;
    int size() const { return end - begin; }
};

struct RHSystem {
    std::shared_ptr<const PolarGrid> grid;
    int charts = 1;
    int fields_per_node = 3;
    SparseMatrix M;          // weighted rows, scaled columns
    std::vector<double> rhs; // weighted
    RowRange interior, seam, boundary, constraint;
    std::optional<int> index;
    // Column j of M is physical unknown columns[j] divided by column_scale[j];
    // physical unknowns without a column (eliminated fix point) are zero.
    std::vector<int> columns;
    std::vector<double> column_scale;
    int physical_unknowns = 0;

    int num_unknowns() const { return static_cast<int>(M.cols()); }
    int num_rows() const { return static_cast<int>(M.rows()); }
};

// Identity column map for a system assembled directly in physical unknowns.
void set_identity_columns(RHSystem& sys);
std::vector<double> to_physical(const RHSystem& sys, const Eigen::VectorXd& scaled);
Eigen::VectorXd to_scaled(const RHSystem& sys, const std::vector<double>& physical);

// Row blocks of a (possibly multi-chart) deformation system over physical
// unknowns laid out chart by chart, 3 per node. Seam rows have zero data.
struct StackedBlocks {
    std::shared_ptr<const PolarGrid> grid;
    int charts = 1;
    SparseMatrix interior;
    std::vector<double> interior_rhs;
    std::vector<int> row_orders{0, 0, 0}; // derivative order of each interior row type
    // Append the gradients of the G rows, which measures the G residual in a
    // discrete H¹ norm (the G rows are pointwise in a).
    bool g_gradient_rows = false;
    SparseMatrix seam;
    SparseMatrix boundary;
    std::vector<double> boundary_rhs;
    SparseMatrix constraint;
    std::vector<double> constraint_rhs;
};

// Highest derivative order of each interior row type over all nodes.
std::vector<int> interior_row_orders(const std::vector<NodeJacobian>& jacobians);

// Weighted, scaled system from row blocks. Pinned unknowns (single-entry
// constraint rows with zero data) are eliminated.
RHSystem stack_system(const StackedBlocks& blocks, RowWeighting weighting = RowWeighting::Equilibrated,
                      ColumnScaling scaling = ColumnScaling::Cell);

// A fix point given as pinned values (single-entry constraint rows with zero
// data) is eliminated from the unknowns rather than kept as rows.
RHSystem make_rh_system(const LinearSystem& sys, RowWeighting weighting = RowWeighting::Equilibrated,
                        ColumnScaling scaling = ColumnScaling::Cell);

// ∂z̄ω + Aω + Bω̄ + E(ω) = Ψ in D, Re(conj(λ) ω) = φ on ∂D, optionally
// ω(x0) = 0. E(ω)(x) = e(x)·ω(center) is a rank-two compact coupling.
// Unknowns interleaved (Re ω, Im ω) per node.
struct VekuaProblem {
    std::shared_ptr<const PolarGrid> grid;
    std::vector<Complex> A, B, E, Psi; // per node; empty means zero
    bool use_E = false;
    std::vector<Complex> lambda; // per boundary node (θ order)
    std::vector<double> phi;     // per boundary node; empty means zero
    std::optional<int> fix_point;
};

RHSystem vekua_system(const VekuaProblem& problem, RowWeighting weighting = RowWeighting::Equilibrated);

struct SolveOptions {
    double tau_kernel = 1e-7; // relative to ‖M‖
    double min_gap = 1e3;
    int block = 12;           // trailing singular triplets computed
    int iterations = 24;      // inverse subspace iterations
    unsigned seed = 0;
};

// Solutions are reported in physical unknowns.
struct RHSolution {
    std::vector<double> particular;
    std::vector<std::vector<double>> kernel; // orthonormal, sign-normalized
    std::vector<double> spectrum;            // trailing σ / ‖M‖, ascending
    double sigma_max = 0.0;
    double gap_ratio = 0.0;
    int kernel_dim = 0;
    double interior_residual = 0.0;   // ‖r_I‖ / ‖b‖ (0 when b = 0)
    double boundary_residual = 0.0;
    double constraint_residual = 0.0;
    double seam_residual = 0.0;
    double residual_norm = 0.0;       // ‖M x − b‖
    double data_norm = 0.0;           // ‖b‖
};

// Least-squares solve with kernel detection: kernel_dim is the split of the
// trailing spectrum below τ_kernel with the largest gap σ_{k+1}/σ_k (for
// k = 0 the ratio σ_1/τ_kernel). Throws IndeterminateError if the best ratio
// is below `min_gap`.
RHSolution solve(const RHSystem& sys, const SolveOptions& opts = {});

// Same decision from a dense SVD (small systems; test oracle).
RHSolution solve_dense(const RHSystem& sys, const SolveOptions& opts = {});

// Kernel split of an ascending relative spectrum; returns {dim, ratio}.
std::pair<int, double> kernel_split(const std::vector<double>& relative_sigma, double tau, double min_gap);

struct SolvabilityReport {
    double interior = 0.0, boundary = 0.0, constraint = 0.0, seam = 0.0;
    double overall = 0.0; // max of the above
};

SolvabilityReport solvability_residual(const RHSystem& sys, const RHSolution& sol);

// Relative residual ‖M x̃‖ / (‖M‖ ‖x̃‖) of a candidate null vector given in
// physical unknowns (x̃ its scaled form).
double null_residual(const RHSystem& sys, const std::vector<double>& x, double sigma_max);

// Largest principal angle between span(vectors) and span(basis) (basis
// orthonormal).
double subspace_angle(const std::vector<std::vector<double>>& vectors,
                      const std::vector<std::vector<double>>& basis);

} // namespace rdeform
