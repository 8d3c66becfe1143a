#include "rdeform/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rdeform {

namespace {

using Triplet = Eigen::Triplet<double>;

// Ambient rate z' = a^j y_{,j} + c n at a node: coefficients of (a1, a2, c)
// for each ambient component.
std::array<Vec3, 3> rate_basis(const Immersion& im, const FundamentalForms& forms, int p)
{
    return {im.jets[p].dy[0], im.jets[p].dy[1], forms.points[p].n};
}

// Derivative of the frame vectors y_{,1}, y_{,2}, n along the parameter
// direction d = (d1, d2) at node p.
std::array<Vec3, 3> rate_basis_derivative(const Immersion& im, const FundamentalForms& forms, int p, double d1,
                                          double d2)
{
    const auto& j = im.jets[p];
    const auto& pf = forms.points[p];
    return {d1 * j.d2y[sym2(0, 0)] + d2 * j.d2y[sym2(0, 1)], d1 * j.d2y[sym2(1, 0)] + d2 * j.d2y[sym2(1, 1)],
            d1 * pf.dn[0] + d2 * pf.dn[1]};
}

Vec3 direction_tangent(const Immersion& im, int p, double d1, double d2)
{
    return d1 * im.jets[p].dy[0] + d2 * im.jets[p].dy[1];
}

// Rows (3, one per ambient component) of w · ∂_d z' at node p, where
// z' = Σ_f u_f e_f and ∂_d u_f comes from the Cartesian stencils.
void derivative_rows(std::vector<Triplet>& tr, int row, const Immersion& im, const FundamentalForms& forms,
                     const PolarGrid& grid, int p, int col_offset, double d1, double d2, double w)
{
    const auto basis = rate_basis(im, forms, p);
    const auto basis_d = rate_basis_derivative(im, forms, p, d1, d2);
    for (int k = 0; k < 2; ++k) {
        const double dk = k == 0 ? d1 : d2;
        if (dk == 0.0) continue;
        for (SparseMatrix::InnerIterator it(k == 0 ? grid.d1() : grid.d2(), p); it; ++it) {
            const int q = static_cast<int>(it.col());
            for (int s = 0; s < 3; ++s)
                for (int f = 0; f < 3; ++f)
                    tr.emplace_back(row + s, col_offset + 3 * q + f, w * dk * it.value() * basis[f](s));
        }
    }
    for (int s = 0; s < 3; ++s)
        for (int f = 0; f < 3; ++f) tr.emplace_back(row + s, col_offset + 3 * p + f, w * basis_d[f](s));
}

// Seam rows of one chart for one seam node into rows [row, row + 9):
// value, derivative along the seam (oriented by theta_sign) and derivative
// along the unit outward conormal. Values and seam derivatives enter with
// `sign` (+1 on F+, −1 on F−); outward conormal derivatives add up to zero.
void seam_rows(std::vector<Triplet>& tr, int row, const Immersion& im, const FundamentalForms& forms,
               const PolarGrid& grid, int p, int col_offset, double sign, double theta_sign)
{
    const auto basis = rate_basis(im, forms, p);
    for (int s = 0; s < 3; ++s)
        for (int f = 0; f < 3; ++f) tr.emplace_back(row + s, col_offset + 3 * p + f, sign * basis[f](s));

    const double x1 = grid.x1(p), x2 = grid.x2(p);
    derivative_rows(tr, row + 3, im, forms, grid, p, col_offset, -x2, x1, sign * theta_sign);

    // conormal: the radial direction minus its component along the seam
    const Vec3 yt = direction_tangent(im, p, -x2, x1);
    const Vec3 yr = direction_tangent(im, p, x1, x2);
    const double alpha = yr.dot(yt) / yt.squaredNorm();
    const double c1 = x1 + alpha * x2, c2 = x2 - alpha * x1;
    const double len = direction_tangent(im, p, c1, c2).norm();
    derivative_rows(tr, row + 6, im, forms, grid, p, col_offset, c1, c2, 1.0 / len);
}

FourierSeries combine(const FourierSeries& a, const FourierSeries& b, double t)
{
    FourierSeries out;
    out.cos_coef.assign(std::max(a.cos_coef.size(), b.cos_coef.size()), 0.0);
    out.sin_coef.assign(std::max(a.sin_coef.size(), b.sin_coef.size()), 0.0);
    for (std::size_t k = 0; k < a.cos_coef.size(); ++k) out.cos_coef[k] += a.cos_coef[k];
    for (std::size_t k = 0; k < b.cos_coef.size(); ++k) out.cos_coef[k] += t * b.cos_coef[k];
    for (std::size_t k = 0; k < a.sin_coef.size(); ++k) out.sin_coef[k] += a.sin_coef[k];
    for (std::size_t k = 0; k < b.sin_coef.size(); ++k) out.sin_coef[k] += t * b.sin_coef[k];
    return out;
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

// ------------------------------------------------------------ closed surface

double ClosedSurface::seam_mismatch() const
{
    double m = 0.0;
    for (std::size_t j = 0; j < seam_plus.size(); ++j)
        m = std::max(m, (plus.jets[seam_plus[j]].y - minus.jets[seam_minus[j]].y).norm());
    return m;
}

ClosedSurface make_closed_surface(Immersion plus, Immersion minus, const MetricField& metric, double tol)
{
    if (plus.grid->spec().n_r != minus.grid->spec().n_r || plus.grid->spec().n_theta != minus.grid->spec().n_theta)
        throw ConfigError("closed surface charts must share the grid");
    ClosedSurface cs;
    cs.grid = plus.grid;
    cs.plus_forms = fundamental_forms(plus, metric);
    cs.minus_forms = fundamental_forms(minus, metric);
    const auto ring = cs.grid->boundary_nodes();
    for (int p : ring) {
        int best = -1;
        double dist = std::numeric_limits<double>::infinity();
        for (int q : ring) {
            const double d = (plus.jets[p].y - minus.jets[q].y).norm();
            if (d < dist) {
                dist = d;
                best = q;
            }
        }
        if (dist > tol) {
            std::ostringstream os;
            os << "seam mismatch: boundary node " << p << " of F+ has no partner on F- (nearest at distance " << dist
               << " > " << tol << ")";
            throw NumericalError(os.str());
        }
        cs.seam_plus.push_back(p);
        cs.seam_minus.push_back(best);
    }
    cs.plus = std::move(plus);
    cs.minus = std::move(minus);
    return cs;
}

ClosedSurface two_chart_sphere(double radius, std::shared_ptr<const PolarGrid> grid, const MetricField& metric)
{
    return make_closed_surface(build_immersion(Chart::stereographic_sphere(radius, Hemisphere::South), grid),
                               build_immersion(Chart::stereographic_sphere(radius, Hemisphere::North), grid), metric);
}

RHSystem glue_closed_system(const ClosedSurface& cs, DeformationKind kind, const MetricField& metric,
                            std::optional<int> fix_point, const AssemblyOptions& opts)
{
    const PolarGrid& grid = *cs.grid;
    const int nn = grid.num_nodes();
    const int n = 6 * nn;
    if (cs.seam_mismatch() > 1e-10) throw NumericalError("seam mismatch between the charts of the closed surface");

    const BaseSurface bp{&cs.plus, &cs.plus_forms, &metric};
    const BaseSurface bm{&cs.minus, &cs.minus_forms, &metric};
    const LinearSystem lp = assemble_linear_system(bp, kind, std::nullopt, fix_point, opts);
    const LinearSystem lm = assemble_linear_system(bm, kind, std::nullopt, std::nullopt, opts);

    StackedBlocks in;
    in.grid = cs.grid;
    in.charts = 2;
    {
        std::vector<Triplet> tr;
        tr.reserve(lp.interior.nonZeros() + lm.interior.nonZeros());
        for (int c = 0; c < 2; ++c) {
            const SparseMatrix& L = c == 0 ? lp.interior : lm.interior;
            for (int i = 0; i < L.outerSize(); ++i)
                for (SparseMatrix::InnerIterator it(L, i); it; ++it)
                    tr.emplace_back(c * 3 * nn + i, c * 3 * nn + static_cast<int>(it.col()), it.value());
        }
        in.interior.resize(n, n);
        in.interior.setFromTriplets(tr.begin(), tr.end());
        in.interior_rhs.assign(n, 0.0);
    }
    const auto op = interior_row_orders(lp.jacobians), om = interior_row_orders(lm.jacobians);
    for (int r = 0; r < 3; ++r) in.row_orders[r] = std::max(op[r], om[r]);

    {
        std::vector<Triplet> tr;
        const int ns = static_cast<int>(cs.seam_plus.size());
        for (int j = 0; j < ns; ++j) {
            const int p = cs.seam_plus[j], q = cs.seam_minus[j];
            const double orient =
                direction_tangent(cs.plus, p, -grid.x2(p), grid.x1(p))
                            .dot(direction_tangent(cs.minus, q, -grid.x2(q), grid.x1(q))) >= 0.0
                    ? 1.0
                    : -1.0;
            seam_rows(tr, 9 * j, cs.plus, cs.plus_forms, grid, p, 0, 1.0, 1.0);
            seam_rows(tr, 9 * j, cs.minus, cs.minus_forms, grid, q, 3 * nn, -1.0, orient);
        }
        in.seam.resize(9 * ns, n);
        in.seam.setFromTriplets(tr.begin(), tr.end());
    }
    in.boundary.resize(0, n);

    {
        std::vector<Triplet> tr;
        for (int i = 0; i < lp.constraint.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(lp.constraint, i); it; ++it)
                tr.emplace_back(i, static_cast<int>(it.col()), it.value());
        in.constraint.resize(lp.constraint.rows(), n);
        in.constraint.setFromTriplets(tr.begin(), tr.end());
        in.constraint_rhs = lp.constraint_rhs;
    }
    return stack_system(in);
}

std::array<std::vector<double>, 3> closed_translation_fields(const ClosedSurface& cs, const MetricField& metric)
{
    const BaseSurface bp{&cs.plus, &cs.plus_forms, &metric};
    const BaseSurface bm{&cs.minus, &cs.minus_forms, &metric};
    const auto tp = translation_fields(bp), tm = translation_fields(bm);
    std::array<std::vector<double>, 3> out;
    for (int s = 0; s < 3; ++s) {
        out[s] = stack_field(tp[s]);
        const auto m = stack_field(tm[s]);
        out[s].insert(out[s].end(), m.begin(), m.end());
    }
    return out;
}

// ------------------------------------------------------------ evolution

double default_smallness_budget(const BaseSurface& base, const BoundaryCondition& bc)
{
    double min_h = std::numeric_limits<double>::infinity();
    for (const auto& pf : base.forms->points) min_h = std::min(min_h, pf.H);
    double mean_lambda = 0.0;
    for (const auto& lt : bc.lambda_tilde) mean_lambda += std::hypot(lt[0], lt[1]);
    mean_lambda /= std::max<std::size_t>(bc.lambda_tilde.size(), 1);
    return 0.1 * min_h * mean_lambda;
}

EvolutionDiagnostics measure(const BaseSurface& base, DeformationKind kind, const DeformationField& field)
{
    EvolutionDiagnostics d;
    const auto r = full_residual(base, kind, field);
    const auto& w = base.grid().area_weights();
    double wsum = 0.0;
    for (int p = 0; p < base.num_nodes(); ++p) {
        d.g_residual = std::max(d.g_residual, std::hypot(r[3 * p], r[3 * p + 1]));
        d.drift = std::max(d.drift, std::abs(r[3 * p + 2]));
        d.mean_drift += w[p] * std::abs(r[3 * p + 2]);
        wsum += w[p];
    }
    if (wsum > 0.0) d.mean_drift /= wsum;
    return d;
}

EvolutionState initial_state(const BaseSurface& base)
{
    EvolutionState s;
    s.field = DeformationField::zeros(base.num_nodes());
    s.history.push_back(EvolutionDiagnostics{});
    return s;
}

EvolutionState step(const EvolutionProblem& pb, const EvolutionState& state, double dt)
{
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const BaseSurface& base = *pb.base;
    const int step_no = static_cast<int>(state.history.size());

    BoundaryData data = pb.boundary;
    data.gamma_rate = combine(pb.boundary.gamma_rate, pb.gamma_rate_slope, state.t);
    const BoundaryCondition bc = boundary_coefficients(*base.immersion, *base.metric, data);
    const double budget = pb.smallness_budget >= 0.0 ? pb.smallness_budget : default_smallness_budget(base, bc);
    const double data_norm = max_abs(bc.gamma_rate);
    if (data_norm > budget) {
        std::ostringstream os;
        os << "step " << step_no << " (t = " << state.t << "): boundary rate max|gamma_rate| = " << data_norm
           << " exceeds the smallness budget " << budget;
        throw NumericalError(os.str());
    }

    const LinearSystem ls = assemble_linear_system(base, pb.kind, bc, pb.fix_point, {}, &state.field);
    const RHSystem sys = make_rh_system(ls);
    const RHSolution sol = solve(sys, pb.solve);

    if (!pb.kernel_coeffs.empty() && static_cast<int>(pb.kernel_coeffs.size()) != sol.kernel_dim) {
        std::ostringstream os;
        os << "step " << step_no << ": " << pb.kernel_coeffs.size() << " kernel coefficients given but the kernel has dimension "
           << sol.kernel_dim;
        throw ConfigError(os.str());
    }
    std::vector<double> rate = sol.particular;
    for (std::size_t k = 0; k < pb.kernel_coeffs.size(); ++k) {
        const double scale = pb.kernel_coeffs[k] / max_abs(sol.kernel[k]);
        for (std::size_t i = 0; i < rate.size(); ++i) rate[i] += scale * sol.kernel[k][i];
    }

    EvolutionState next;
    next.t = state.t + dt;
    const DeformationField r = unstack_field(rate);
    next.field = state.field;
    for (int p = 0; p < base.num_nodes(); ++p) {
        next.field.a1[p] += dt * r.a1[p];
        next.field.a2[p] += dt * r.a2[p];
        next.field.c[p] += dt * r.c[p];
    }
    EvolutionDiagnostics d = measure(base, pb.kind, next.field);
    d.t = next.t;
    d.kernel_dim = sol.kernel_dim;
    d.gap_ratio = sol.gap_ratio;
    d.rate_norm = max_abs(rate);
    d.data_norm = data_norm;
    next.history = state.history;
    next.history.push_back(d);
    return next;
}

EvolutionState run(const EvolutionProblem& pb, double t0, double dt,
                   const std::function<void(const EvolutionState&)>& on_step)
{
    if (t0 < 0.0) throw ConfigError("t0 must be non-negative");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    EvolutionState s = initial_state(*pb.base);
    if (on_step) on_step(s);
    while (s.t < t0 - 1e-12 * std::max(1.0, t0)) {
        s = step(pb, s, std::min(dt, t0 - s.t));
        if (on_step) on_step(s);
    }
    return s;
}

} // namespace rdeform
