#include "rdeform/rhsolver.hpp"

#include "rdeform/sparse_svd.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace rdeform {

namespace {

using Triplet = Eigen::Triplet<double>;

// Local mesh scale: radial spacing, or the arc spacing where rings are tight.
double local_scale(const PolarGrid& grid, int p)
{
    return p == 0 ? grid.h() : std::min(grid.h(), grid.r(p) * grid.dtheta());
}

std::vector<double> interior_weights(const PolarGrid& grid, const std::vector<int>& row_orders, RowWeighting w)
{
    const int nn = grid.num_nodes();
    const int rpn = static_cast<int>(row_orders.size());
    std::vector<double> out(static_cast<std::size_t>(rpn) * nn, 1.0);
    if (w == RowWeighting::Area) {
        // control-cell areas; the quadrature weight of the center vanishes
        const double h = grid.h(), dth = grid.dtheta();
        for (int p = 0; p < nn; ++p) {
            double cell = p == 0 ? 0.25 * std::numbers::pi * h * h : grid.r(p) * h * dth;
            if (grid.is_boundary(p)) cell *= 0.5;
            for (int r = 0; r < rpn; ++r) out[rpn * p + r] = std::sqrt(cell);
        }
    } else if (w == RowWeighting::Balanced) {
        for (int p = 0; p < nn; ++p)
            for (int r = 0; r < rpn; ++r) out[rpn * p + r] = std::pow(local_scale(grid, p), row_orders[r]);
    }
    return out;
}

// Highest derivative order present in a node Jacobian row (coefficients
// below 1e-6 of the row maximum are finite-difference noise).
int row_order(const std::array<double, 18>& row)
{
    double mx = 0.0;
    for (double v : row) mx = std::max(mx, std::abs(v));
    int order = 0;
    for (int col = 0; col < 18; ++col) {
        const int k = col % 6;
        if (std::abs(row[col]) > 1e-6 * mx) order = std::max(order, k == 0 ? 0 : (k < 3 ? 1 : 2));
    }
    return order;
}

double boundary_weight(const PolarGrid& grid, RowWeighting w)
{
    return w == RowWeighting::Area ? std::sqrt(grid.dtheta()) : 1.0;
}

void equilibrate(SparseMatrix& M, std::vector<double>& rhs)
{
    for (int i = 0; i < M.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(M, i); it; ++it) s += it.value() * it.value();
        if (s == 0.0) continue;
        const double w = 1.0 / std::sqrt(s);
        for (SparseMatrix::InnerIterator it(M, i); it; ++it) it.valueRef() *= w;
        rhs[i] *= w;
    }
}

double norm_of(const Eigen::VectorXd& v, const RowRange& r)
{
    return r.size() > 0 ? v.segment(r.begin, r.size()).norm() : 0.0;
}

void sign_normalize(Eigen::VectorXd& v)
{
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
}

std::string spectrum_text(const std::vector<double>& rel)
{
    std::ostringstream os;
    os << std::setprecision(3);
    for (std::size_t i = 0; i < rel.size(); ++i) os << (i ? ", " : "") << rel[i];
    return os.str();
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& X)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    return qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
}

RHSolution finish(const RHSystem& sys, const SolveOptions& opts, const std::vector<double>& rel, double sigma_max,
                  const Eigen::MatrixXd& trailing_vectors, const SparseQR* factored = nullptr)
{
    const auto [dim, ratio] = kernel_split(rel, opts.tau_kernel, opts.min_gap);
    if (ratio < opts.min_gap)
        throw IndeterminateError("indeterminate kernel dimension: best spectral gap " + std::to_string(ratio) +
                                 " < " + std::to_string(opts.min_gap) + "; relative spectrum tail [" +
                                 spectrum_text(rel) + "]");
    RHSolution sol;
    sol.spectrum = rel;
    sol.sigma_max = sigma_max;
    sol.gap_ratio = ratio;
    sol.kernel_dim = dim;

    // kernel basis: orthonormal in scaled unknowns for the deflated solve,
    // orthonormal in physical unknowns for reporting
    Eigen::MatrixXd Ks = dim > 0 ? orthonormal_columns(trailing_vectors.leftCols(dim))
                                 : Eigen::MatrixXd(sys.num_unknowns(), 0);
    const Eigen::Index np = sys.physical_unknowns;
    Eigen::MatrixXd Kp(np, dim);
    for (int k = 0; k < dim; ++k) {
        const auto v = to_physical(sys, Ks.col(k));
        Kp.col(k) = Eigen::Map<const Eigen::VectorXd>(v.data(), np);
    }
    if (dim > 0) Kp = orthonormal_columns(Kp);
    for (int k = 0; k < dim; ++k) {
        Eigen::VectorXd v = Kp.col(k);
        sign_normalize(v);
        Kp.col(k) = v;
        sol.kernel.emplace_back(v.data(), v.data() + v.size());
    }

    const Eigen::Map<const Eigen::VectorXd> b(sys.rhs.data(), static_cast<Eigen::Index>(sys.rhs.size()));
    if (b.norm() > 0.0) {
        // without a kernel the factorization already carries Qᵀb
        const auto xs = dim == 0 && factored ? factored->solve() : least_squares(sys.M, sys.rhs, Ks);
        const auto xp = to_physical(sys, Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())));
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xp.data(), np);
        if (dim > 0) x -= Kp * (Kp.transpose() * x);
        sol.particular.assign(x.data(), x.data() + np);
    } else {
        sol.particular.assign(np, 0.0);
    }

    const auto rep = solvability_residual(sys, sol);
    sol.interior_residual = rep.interior;
    sol.boundary_residual = rep.boundary;
    sol.constraint_residual = rep.constraint;
    sol.seam_residual = rep.seam;
    sol.residual_norm = (sys.M * to_scaled(sys, sol.particular) - b).norm();
    sol.data_norm = b.norm();
    return sol;
}

} // namespace

int compute_index(const std::vector<Complex>& lambda)
{
    const std::size_t n = lambda.size();
    if (n < 2) throw IndeterminateError("too few boundary samples to compute the index; increase N_theta");
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(lambda[j]) < 1e-12)
            throw NumericalError("boundary coefficient vanishes at sample " + std::to_string(j));
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = std::arg(lambda[(j + 1) % n] / lambda[j]); // in (−π, π]
        if (std::abs(d) >= 0.5 * std::numbers::pi)
            throw IndeterminateError("boundary phase under-resolved (step " + std::to_string(d) + " rad at sample " +
                                     std::to_string(j) + "); increase N_theta");
        total += d;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

void set_identity_columns(RHSystem& sys)
{
    const int n = sys.num_unknowns();
    sys.physical_unknowns = n;
    sys.columns.resize(n);
    for (int j = 0; j < n; ++j) sys.columns[j] = j;
    sys.column_scale.assign(n, 1.0);
}

std::vector<double> to_physical(const RHSystem& sys, const Eigen::VectorXd& scaled)
{
    std::vector<double> x(sys.physical_unknowns, 0.0);
    for (std::size_t j = 0; j < sys.columns.size(); ++j) x[sys.columns[j]] = sys.column_scale[j] * scaled(j);
    return x;
}

Eigen::VectorXd to_scaled(const RHSystem& sys, const std::vector<double>& physical)
{
    Eigen::VectorXd x(sys.num_unknowns());
    for (std::size_t j = 0; j < sys.columns.size(); ++j) x(j) = physical[sys.columns[j]] / sys.column_scale[j];
    return x;
}

RHSystem stack_system(const StackedBlocks& in, RowWeighting weighting, ColumnScaling scaling)
{
    const PolarGrid& grid = *in.grid;
    const int nn = grid.num_nodes();
    const int n = static_cast<int>(in.interior.cols());
    RHSystem out;
    out.grid = in.grid;
    out.charts = in.charts;
    out.fields_per_node = 3;
    out.physical_unknowns = n;

    // pinned unknowns leave the system; other constraint rows stay
    std::vector<char> pinned(n, 0), pin_row(in.constraint.rows(), 0);
    for (int i = 0; i < in.constraint.outerSize(); ++i) {
        int count = 0, col = -1;
        for (SparseMatrix::InnerIterator it(in.constraint, i); it; ++it)
            if (it.value() != 0.0) {
                ++count;
                col = static_cast<int>(it.col());
            }
        if (count == 1 && in.constraint_rhs[i] == 0.0) {
            pinned[col] = 1;
            pin_row[i] = 1;
        }
    }

    std::vector<int> col_of(n, -1);
    const double h = grid.h(), dth = grid.dtheta();
    for (int j = 0; j < n; ++j) {
        if (pinned[j]) continue;
        double s = 1.0;
        if (scaling == ColumnScaling::Cell) {
            const int p = (j / 3) % nn;
            const double cell = p == 0 ? 0.25 * std::numbers::pi * h * h : grid.r(p) * h * dth;
            s = std::sqrt(cell) * (j % 3 == 2 ? local_scale(grid, p) : 1.0);
        }
        col_of[j] = static_cast<int>(out.columns.size());
        out.columns.push_back(j);
        out.column_scale.push_back(s);
    }

    std::vector<Triplet> tr;
    std::vector<double> rhs;
    auto add = [&](const SparseMatrix& block, int src_row, int dst_row, double w) {
        for (SparseMatrix::InnerIterator it(block, src_row); it; ++it) {
            const int j = col_of[it.col()];
            if (j >= 0) tr.emplace_back(dst_row, j, w * it.value() * out.column_scale[j]);
        }
    };
    int row = 0;

    const auto wi = interior_weights(grid, in.row_orders, weighting);
    const int per_chart = static_cast<int>(wi.size());
    for (int i = 0; i < in.interior.rows(); ++i) {
        const double w = wi[i % per_chart];
        add(in.interior, i, row + i, w);
        rhs.push_back(w * in.interior_rhs[i]);
    }
    row += static_cast<int>(in.interior.rows());
    if (in.g_gradient_rows) {
        // ∂_k of the G rows (k = 1, 2), scaled by the local mesh scale
        std::vector<Triplet> rt;
        const int charts = static_cast<int>(in.interior.rows()) / (3 * nn);
        for (int c = 0; c < charts; ++c)
            for (int k = 0; k < 2; ++k)
                for (int p = 0; p < nn; ++p)
                    for (int g = 0; g < 2; ++g) {
                        const int r = ((c * 2 + k) * nn + p) * 2 + g;
                        const double l = local_scale(grid, p);
                        for (SparseMatrix::InnerIterator it(k == 0 ? grid.d1() : grid.d2(), p); it; ++it) {
                            const int src = c * 3 * nn + 3 * static_cast<int>(it.col()) + g;
                            rt.emplace_back(r, src, l * it.value() * wi[src % per_chart]);
                        }
                    }
        SparseMatrix R(charts * 4 * nn, in.interior.rows());
        R.setFromTriplets(rt.begin(), rt.end());
        const SparseMatrix A = (R * in.interior).pruned();
        const Eigen::VectorXd b = R * Eigen::Map<const Eigen::VectorXd>(in.interior_rhs.data(), in.interior.rows());
        for (int i = 0; i < A.rows(); ++i) {
            add(A, i, row + i, 1.0);
            rhs.push_back(b(i));
        }
        row += static_cast<int>(A.rows());
    }
    out.interior = {0, row};

    for (int i = 0; i < in.seam.rows(); ++i) {
        add(in.seam, i, row + i, 1.0);
        rhs.push_back(0.0);
    }
    out.seam = {row, row + static_cast<int>(in.seam.rows())};
    row = out.seam.end;

    const int nb = static_cast<int>(in.boundary.rows());
    const double wb = boundary_weight(grid, weighting);
    for (int i = 0; i < nb; ++i) {
        add(in.boundary, i, row + i, wb);
        rhs.push_back(wb * in.boundary_rhs[i]);
    }
    out.boundary = {row, row + nb};
    row = out.boundary.end;

    const int begin = row;
    for (int i = 0; i < in.constraint.rows(); ++i) {
        if (pin_row[i]) continue;
        add(in.constraint, i, row++, 1.0);
        rhs.push_back(in.constraint_rhs[i]);
    }
    out.constraint = {begin, row};

    out.M.resize(row, static_cast<int>(out.columns.size()));
    out.M.setFromTriplets(tr.begin(), tr.end());
    out.rhs = std::move(rhs);
    if (weighting == RowWeighting::Equilibrated) equilibrate(out.M, out.rhs);
    return out;
}

std::vector<int> interior_row_orders(const std::vector<NodeJacobian>& jacobians)
{
    std::vector<int> orders(3, 0);
    for (const auto& J : jacobians)
        for (int r = 0; r < 3; ++r) orders[r] = std::max(orders[r], row_order(J[r]));
    return orders;
}

RHSystem make_rh_system(const LinearSystem& sys, RowWeighting weighting, ColumnScaling scaling)
{
    StackedBlocks in;
    in.grid = sys.grid;
    in.interior = sys.interior;
    in.interior_rhs = sys.interior_rhs;
    in.row_orders = interior_row_orders(sys.jacobians);
    in.seam.resize(0, sys.num_unknowns());
    in.boundary = sys.boundary;
    in.boundary_rhs = sys.boundary_rhs;
    in.constraint = sys.constraint;
    in.constraint_rhs = sys.constraint_rhs;
    RHSystem out = stack_system(in, weighting, scaling);
    if (sys.bc) out.index = sys.bc->index;
    return out;
}

RHSystem vekua_system(const VekuaProblem& pb, RowWeighting weighting)
{
    const PolarGrid& grid = *pb.grid;
    const int nn = grid.num_nodes();
    auto coef = [](const std::vector<Complex>& v, int p) { return v.empty() ? Complex{} : v[p]; };
    const auto wi = interior_weights(grid, {1, 1}, weighting);

    std::vector<Triplet> tr;
    std::vector<double> rhs(2 * nn, 0.0);
    for (int p = 0; p < nn; ++p) {
        const int re = 2 * p, im = 2 * p + 1;
        const double w = wi[re];
        for (SparseMatrix::InnerIterator it(grid.d1(), p); it; ++it) {
            const int q = static_cast<int>(it.col());
            tr.emplace_back(re, 2 * q, 0.5 * w * it.value());     // ½ u_1
            tr.emplace_back(im, 2 * q + 1, 0.5 * w * it.value()); // ½ v_1
        }
        for (SparseMatrix::InnerIterator it(grid.d2(), p); it; ++it) {
            const int q = static_cast<int>(it.col());
            tr.emplace_back(re, 2 * q + 1, -0.5 * w * it.value()); // −½ v_2
            tr.emplace_back(im, 2 * q, 0.5 * w * it.value());      // ½ u_2
        }
        const Complex A = coef(pb.A, p), B = coef(pb.B, p);
        tr.emplace_back(re, 2 * p, w * (A.real() + B.real()));
        tr.emplace_back(re, 2 * p + 1, w * (B.imag() - A.imag()));
        tr.emplace_back(im, 2 * p, w * (A.imag() + B.imag()));
        tr.emplace_back(im, 2 * p + 1, w * (A.real() - B.real()));
        if (pb.use_E) {
            const Complex e = coef(pb.E, p);
            tr.emplace_back(re, 0, w * e.real());
            tr.emplace_back(re, 1, -w * e.imag());
            tr.emplace_back(im, 0, w * e.imag());
            tr.emplace_back(im, 1, w * e.real());
        }
        const Complex psi = coef(pb.Psi, p);
        rhs[re] = w * psi.real();
        rhs[im] = w * psi.imag();
    }

    RHSystem out;
    out.grid = pb.grid;
    out.fields_per_node = 2;
    out.interior = {0, 2 * nn};
    out.seam = {2 * nn, 2 * nn};
    int row = 2 * nn;

    const auto nodes = grid.boundary_nodes();
    if (pb.lambda.size() != nodes.size()) throw NumericalError("vekua_system: lambda must have one sample per boundary node");
    const double wb = boundary_weight(grid, weighting);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const int p = nodes[j];
        tr.emplace_back(row, 2 * p, wb * pb.lambda[j].real());
        tr.emplace_back(row, 2 * p + 1, wb * pb.lambda[j].imag());
        rhs.push_back(wb * (pb.phi.empty() ? 0.0 : pb.phi[j]));
        ++row;
    }
    out.boundary = {2 * nn, row};

    if (pb.fix_point) {
        const int p = *pb.fix_point;
        if (p < 0 || p >= nn) throw ConfigError("fix_point node index out of range");
        tr.emplace_back(row, 2 * p, 1.0);
        tr.emplace_back(row + 1, 2 * p + 1, 1.0);
        rhs.push_back(0.0);
        rhs.push_back(0.0);
        out.constraint = {row, row + 2};
        row += 2;
    } else {
        out.constraint = {row, row};
    }

    out.M.resize(row, 2 * nn);
    out.M.setFromTriplets(tr.begin(), tr.end());
    out.rhs = std::move(rhs);
    if (weighting == RowWeighting::Equilibrated) equilibrate(out.M, out.rhs);
    set_identity_columns(out);
    out.index = compute_index(pb.lambda);
    return out;
}

std::pair<int, double> kernel_split(const std::vector<double>& rel, double tau, double min_gap)
{
    (void)min_gap;
    if (rel.empty()) return {0, std::numeric_limits<double>::infinity()};
    int below = 0;
    while (below < static_cast<int>(rel.size()) && rel[below] <= tau) ++below;
    int best_dim = 0;
    double best = rel[0] / tau;
    for (int k = 1; k <= below; ++k) {
        const double ratio = k < static_cast<int>(rel.size())
                                 ? rel[k] / std::max(rel[k - 1], std::numeric_limits<double>::min())
                                 : std::numeric_limits<double>::infinity();
        if (ratio > best) {
            best = ratio;
            best_dim = k;
        }
    }
    return {best_dim, best};
}

RHSolution solve(const RHSystem& sys, const SolveOptions& opts)
{
    const double smax = largest_singular(sys.M, 200, opts.seed);
    if (!(smax > 0.0)) throw NumericalError("system matrix is zero");
    TrailingOptions to;
    to.block = opts.block;
    to.iterations = opts.iterations;
    to.seed = opts.seed;
    const int n = sys.num_unknowns();
    const SparseQR qr(sys.M, sys.rhs);
    for (;;) {
        const TrailingSVD t = qr.trailing(to);
        std::vector<double> rel(t.sigma.size());
        for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = t.sigma[i] / smax;
        // a block with every value below τ cannot locate the gap: enlarge it
        if (rel.back() <= opts.tau_kernel && to.block < n) {
            to.block = std::min(2 * to.block, n);
            continue;
        }
        return finish(sys, opts, rel, smax, t.vectors, &qr);
    }
}

RHSolution solve_dense(const RHSystem& sys, const SolveOptions& opts)
{
    const DenseSVD d = dense_svd(sys.M);
    const int n = static_cast<int>(d.sigma.size());
    const double smax = d.sigma(n - 1);
    if (!(smax > 0.0)) throw NumericalError("system matrix is zero");
    const int b = std::min(n, std::max(opts.block, 1));
    std::vector<double> rel(b);
    for (int i = 0; i < b; ++i) rel[i] = d.sigma(i) / smax;
    return finish(sys, opts, rel, smax, d.V.leftCols(b));
}

SolvabilityReport solvability_residual(const RHSystem& sys, const RHSolution& sol)
{
    const Eigen::Map<const Eigen::VectorXd> b(sys.rhs.data(), static_cast<Eigen::Index>(sys.rhs.size()));
    const Eigen::VectorXd r = sys.M * to_scaled(sys, sol.particular) - b;
    const double bn = b.norm();
    const double scale = bn > 0.0 ? bn : 1.0;
    SolvabilityReport rep;
    rep.interior = norm_of(r, sys.interior) / scale;
    rep.boundary = norm_of(r, sys.boundary) / scale;
    rep.constraint = norm_of(r, sys.constraint) / scale;
    rep.seam = norm_of(r, sys.seam) / scale;
    rep.overall = std::max({rep.interior, rep.boundary, rep.constraint, rep.seam});
    return rep;
}

double null_residual(const RHSystem& sys, const std::vector<double>& x, double sigma_max)
{
    const Eigen::VectorXd v = to_scaled(sys, x);
    return (sys.M * v).norm() / (sigma_max * v.norm());
}

double subspace_angle(const std::vector<std::vector<double>>& vectors, const std::vector<std::vector<double>>& basis)
{
    if (vectors.empty()) return 0.0;
    const Eigen::Index n = static_cast<Eigen::Index>(vectors.front().size());
    if (basis.empty()) return 0.5 * std::numbers::pi;
    Eigen::MatrixXd X(n, vectors.size()), Q(n, basis.size());
    for (std::size_t k = 0; k < vectors.size(); ++k) X.col(k) = Eigen::Map<const Eigen::VectorXd>(vectors[k].data(), n);
    for (std::size_t k = 0; k < basis.size(); ++k) Q.col(k) = Eigen::Map<const Eigen::VectorXd>(basis[k].data(), n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd Qx = qr.householderQ() * Eigen::MatrixXd::Identity(n, X.cols());
    const Eigen::MatrixXd out = Qx - Q * (Q.transpose() * Qx);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out);
    return std::asin(std::min(1.0, svd.singularValues()(0)));
}

} // namespace rdeform
