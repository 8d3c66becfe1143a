#include "rdeform/linearize.hpp"

#include "rdeform/rhsolver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace rdeform {

namespace {

FieldJet field_jet_at(const std::vector<FieldJet>* jets, int p)
{
    if (jets) return (*jets)[p];
    return FieldJet{};
}

Vec3 field_vector(const BaseSurface& base, int p, const FieldJet& f)
{
    const NodeJet& j = base.immersion->jets[p];
    return f[0][0] * j.dy[0] + f[1][0] * j.dy[1] + f[2][0] * base.forms->points[p].n;
}

NodeJacobian node_jacobian(const BaseSurface& base, DeformationKind kind, int p, const FieldJet& f0, double h)
{
    NodeJacobian J{};
    const Vec3 n0 = transported_normal(base, p, field_vector(base, p, f0));
    for (int col = 0; col < 18; ++col) {
        const int f = col / 6, k = col % 6;
        FieldJet fp = f0, fm = f0;
        fp[f][k] += h;
        fm[f][k] -= h;
        NodeResidual rp, rm;
        if (k == 0) {
            rp = node_residual(base, kind, p, fp);
            rm = node_residual(base, kind, p, fm);
        } else {
            rp = node_residual(base, kind, p, fp, n0);
            rm = node_residual(base, kind, p, fm, n0);
        }
        J[0][col] = (rp.g1 - rm.g1) / (2.0 * h);
        J[1][col] = (rp.g2 - rm.g2) / (2.0 * h);
        J[2][col] = (rp.inv - rm.inv) / (2.0 * h);
    }
    return J;
}

void check_admitted_forms(const FundamentalForms& f)
{
    for (std::size_t p = 0; p < f.points.size(); ++p) {
        const auto& pf = f.points[p];
        if (!(pf.k1 > 0.0 && pf.k2 > 0.0 && pf.H > 0.0)) {
            std::ostringstream os;
            os << "deformed surface not admitted at node " << p << ": k1=" << pf.k1 << ", k2=" << pf.k2
               << ", H=" << pf.H;
            throw AdmittanceError(os.str());
        }
    }
}

} // namespace

std::string to_string(DeformationKind kind)
{
    switch (kind) {
    case DeformationKind::Ch: return "Ch";
    case DeformationKind::H: return "H";
    case DeformationKind::A: return "A";
    case DeformationKind::K: return "K";
    }
    return "?";
}

DeformationKind parse_kind(const std::string& name)
{
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "ch") return DeformationKind::Ch;
    if (s == "h") return DeformationKind::H;
    if (s == "a") return DeformationKind::A;
    if (s == "k") return DeformationKind::K;
    throw ConfigError("unknown deformation kind '" + name + "' (expected Ch, H, A or K)");
}

double invariant_value(DeformationKind kind, const PointForms& pf)
{
    switch (kind) {
    case DeformationKind::Ch: return 2.0 * pf.H / pf.K;
    case DeformationKind::H: return pf.H;
    case DeformationKind::A: return pf.sqrt_g;
    case DeformationKind::K: return pf.K;
    }
    return 0.0;
}

Vec3 transported_normal(const BaseSurface& base, int node, const Vec3& z)
{
    const Vec3& n = base.forms->points[node].n;
    if (base.metric->is_flat()) return n;
    const Vec3& y = base.immersion->jets[node].y;
    const std::array<Vec3, 2> path{y, y + z};
    return parallel_transport(*base.metric, path, n, base.transport_substeps);
}

NodeResidual node_residual(const BaseSurface& base, DeformationKind kind, int node, const FieldJet& f)
{
    return node_residual(base, kind, node, f, transported_normal(base, node, field_vector(base, node, f)));
}

NodeResidual node_residual(const BaseSurface& base, DeformationKind kind, int node, const FieldJet& f,
                           const Vec3& n_transported)
{
    const PointForms& pf = base.forms->points[node];
    const NodeJet dj = deformed_jet(base.immersion->jets[node], pf, f);
    const PointForms pt = point_forms(*base.metric, dj.y, dj.dy, dj.d2y, &n_transported);
    const Vec3 An = base.metric->is_flat() ? n_transported : Vec3(base.metric->metric_at(dj.y) * n_transported);
    NodeResidual r;
    r.g1 = An.dot(dj.dy[0]) / std::sqrt(pf.g(0, 0));
    r.g2 = An.dot(dj.dy[1]) / std::sqrt(pf.g(1, 1));
    const double i0 = invariant_value(kind, pf);
    r.inv = (invariant_value(kind, pt) - i0) / i0;
    return r;
}

std::vector<double> full_residual(const BaseSurface& base, DeformationKind kind, const DeformationField& field)
{
    const auto jets = field_jets(base.grid(), field);
    const int nn = base.num_nodes();
    std::vector<double> out(3 * nn);
#pragma omp parallel for schedule(static)
    for (int p = 0; p < nn; ++p) {
        const NodeResidual r = node_residual(base, kind, p, jets[p]);
        out[3 * p] = r.g1;
        out[3 * p + 1] = r.g2;
        out[3 * p + 2] = r.inv;
    }
    return out;
}

std::vector<double> full_residual_serial(const BaseSurface& base, DeformationKind kind,
                                         const DeformationField& field)
{
    const auto jets = field_jets(base.grid(), field);
    const int nn = base.num_nodes();
    std::vector<double> out(3 * nn);
    for (int p = 0; p < nn; ++p) {
        const NodeResidual r = node_residual(base, kind, p, jets[p]);
        out[3 * p] = r.g1;
        out[3 * p + 1] = r.g2;
        out[3 * p + 2] = r.inv;
    }
    return out;
}

std::vector<std::array<double, 2>> g_residual(const BaseSurface& base, const DeformationField& field)
{
    const auto r = full_residual(base, DeformationKind::H, field);
    std::vector<std::array<double, 2>> out(base.num_nodes());
    for (int p = 0; p < base.num_nodes(); ++p) out[p] = {r[3 * p], r[3 * p + 1]};
    return out;
}

std::vector<double> invariant_residual(DeformationKind kind, const FundamentalForms& base,
                                       const FundamentalForms& deformed)
{
    if (base.points.size() != deformed.points.size())
        throw NumericalError("invariant_residual: forms on different grids");
    check_admitted_forms(deformed);
    std::vector<double> out(base.points.size());
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = invariant_value(kind, deformed.points[p]) - invariant_value(kind, base.points[p]);
    return out;
}

std::vector<NodeJacobian> jet_jacobians(const BaseSurface& base, DeformationKind kind,
                                        const DeformationField* field, double step)
{
    const int nn = base.num_nodes();
    std::vector<FieldJet> jets;
    if (field) jets = field_jets(base.grid(), *field);
    std::vector<NodeJacobian> out(nn);
#pragma omp parallel for schedule(dynamic, 64)
    for (int p = 0; p < nn; ++p)
        out[p] = node_jacobian(base, kind, p, field_jet_at(field ? &jets : nullptr, p), step);
    return out;
}

std::vector<NodeJacobian> jet_jacobians_serial(const BaseSurface& base, DeformationKind kind,
                                               const DeformationField* field, double step)
{
    const int nn = base.num_nodes();
    std::vector<FieldJet> jets;
    if (field) jets = field_jets(base.grid(), *field);
    std::vector<NodeJacobian> out(nn);
    for (int p = 0; p < nn; ++p)
        out[p] = node_jacobian(base, kind, p, field_jet_at(field ? &jets : nullptr, p), step);
    return out;
}

SparseMatrix compose_interior(const PolarGrid& grid, const std::vector<NodeJacobian>& jac)
{
    using Triplet = Eigen::Triplet<double>;
    const int nn = grid.num_nodes();
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(nn) * 200);
    for (int p = 0; p < nn; ++p)
        for (int r = 0; r < 3; ++r) {
            const auto& row = jac[p][r];
            double scale = 0.0;
            for (double v : row) scale = std::max(scale, std::abs(v));
            // finite-difference rounding noise (~1e-12 relative) is dropped
            const double floor = 1e-10 * scale;
            for (int col = 0; col < 18; ++col) {
                const double c = row[col];
                if (std::abs(c) <= floor) continue;
                const int f = col / 6, k = col % 6;
                if (k == 0) {
                    tr.emplace_back(3 * p + r, 3 * p + f, c);
                    continue;
                }
                for (SparseMatrix::InnerIterator it(grid.jet_op(k), p); it; ++it)
                    tr.emplace_back(3 * p + r, 3 * static_cast<int>(it.col()) + f, c * it.value());
            }
        }
    SparseMatrix L(3 * nn, 3 * nn);
    L.setFromTriplets(tr.begin(), tr.end());
    return L;
}

double FourierSeries::operator()(double theta) const
{
    double s = 0.0;
    for (std::size_t k = 0; k < cos_coef.size(); ++k) s += cos_coef[k] * std::cos(k * theta);
    for (std::size_t k = 0; k < sin_coef.size(); ++k) s += sin_coef[k] * std::sin(k * theta);
    return s;
}

bool FourierSeries::is_zero() const
{
    auto zero = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); };
    return zero(cos_coef) && zero(sin_coef);
}

namespace {

void finish_boundary(BoundaryCondition& bc)
{
    const int nb = static_cast<int>(bc.nodes.size());
    bc.lambda.resize(nb);
    bc.phi_rate.resize(nb);
    if (bc.gamma_rate.empty()) bc.gamma_rate.assign(nb, 0.0);
    double scale = 0.0;
    for (const auto& lt : bc.lambda_tilde) scale = std::max(scale, std::hypot(lt[0], lt[1]));
    for (int j = 0; j < nb; ++j) {
        const double mod = std::hypot(bc.lambda_tilde[j][0], bc.lambda_tilde[j][1]);
        if (!(mod > 1e-12 * std::max(scale, 1.0))) {
            std::ostringstream os;
            os << "degenerate boundary field: |lambda~| = 0 at theta = " << bc.theta[j];
            throw NumericalError(os.str());
        }
        bc.lambda[j] = Complex(bc.lambda_tilde[j][0], -bc.lambda_tilde[j][1]) / mod;
        bc.phi_rate[j] = bc.gamma_rate[j] / mod;
    }
    bc.index = compute_index(bc.lambda);
}

} // namespace

BoundaryCondition boundary_coefficients(const Immersion& im, const MetricField& metric, const BoundaryData& data)
{
    const PolarGrid& grid = *im.grid;
    BoundaryCondition bc;
    bc.nodes = grid.boundary_nodes();
    const int nb = static_cast<int>(bc.nodes.size());
    bc.theta.resize(nb);
    bc.l.resize(nb);
    bc.v.resize(nb);
    bc.lambda_tilde.resize(nb);
    bc.gamma_rate.resize(nb);
    for (int j = 0; j < nb; ++j) {
        const int p = bc.nodes[j];
        const NodeJet& jet = im.jets[p];
        const double th = grid.theta(p);
        bc.theta[j] = th;
        bc.l[j] = {data.l1(th), data.l2(th)};
        bc.v[j] = bc.l[j][0] * jet.dy[0] + bc.l[j][1] * jet.dy[1];
        const Mat3 A = metric.is_flat() ? Mat3::Identity() : metric.metric_at(jet.y);
        bc.lambda_tilde[j] = {jet.dy[0].dot(A * bc.v[j]), jet.dy[1].dot(A * bc.v[j])};
        bc.gamma_rate[j] = data.gamma_rate(th);
    }
    finish_boundary(bc);
    return bc;
}

BoundaryCondition boundary_from_lambda_tilde(const PolarGrid& grid,
                                             const std::vector<std::array<double, 2>>& lambda_tilde)
{
    BoundaryCondition bc;
    bc.nodes = grid.boundary_nodes();
    if (lambda_tilde.size() != bc.nodes.size())
        throw NumericalError("boundary samples must match the boundary ring size");
    for (int p : bc.nodes) bc.theta.push_back(grid.theta(p));
    bc.lambda_tilde = lambda_tilde;
    finish_boundary(bc);
    return bc;
}

std::vector<double> stack_field(const DeformationField& f)
{
    const int nn = f.num_nodes();
    std::vector<double> x(3 * nn);
    for (int p = 0; p < nn; ++p) {
        x[3 * p] = f.a1[p];
        x[3 * p + 1] = f.a2[p];
        x[3 * p + 2] = f.c[p];
    }
    return x;
}

DeformationField unstack_field(const std::vector<double>& x)
{
    const int nn = static_cast<int>(x.size() / 3);
    DeformationField f = DeformationField::zeros(nn);
    for (int p = 0; p < nn; ++p) {
        f.a1[p] = x[3 * p];
        f.a2[p] = x[3 * p + 1];
        f.c[p] = x[3 * p + 2];
    }
    return f;
}

LinearSystem assemble_linear_system(const BaseSurface& base, DeformationKind kind,
                                    const std::optional<BoundaryCondition>& bc, std::optional<int> fix_point,
                                    const AssemblyOptions& opts, const DeformationField* field)
{
    using Triplet = Eigen::Triplet<double>;
    if (opts.require_conjugate_isothermal) {
        const auto rep = verify_conjugate_isothermal(*base.forms, opts.isothermal_tol);
        if (!rep.pass) {
            std::ostringstream os;
            os << "base surface is not in conjugate isothermal coordinates: max|b12| = " << rep.max_b12
               << ", max|b11-b22| = " << rep.max_b11_minus_b22 << " (max V = " << rep.max_V << ")";
            throw AdmittanceError(os.str());
        }
    }
    const PolarGrid& grid = base.grid();
    const int nn = grid.num_nodes();

    LinearSystem sys;
    sys.grid = base.immersion->grid;
    sys.kind = kind;
    sys.jacobians = jet_jacobians(base, kind, field, opts.step);
    sys.interior = compose_interior(grid, sys.jacobians);
    sys.interior_rhs.assign(3 * nn, 0.0);

    if (bc) {
        sys.bc = bc;
        const int nb = static_cast<int>(bc->nodes.size());
        std::vector<Triplet> tr;
        for (int j = 0; j < nb; ++j) {
            const int p = bc->nodes[j];
            tr.emplace_back(j, 3 * p, bc->lambda[j].real());
            tr.emplace_back(j, 3 * p + 1, -bc->lambda[j].imag());
        }
        sys.boundary.resize(nb, 3 * nn);
        sys.boundary.setFromTriplets(tr.begin(), tr.end());
        sys.boundary_rhs = bc->phi_rate;
    } else {
        sys.boundary.resize(0, 3 * nn);
    }

    if (fix_point) {
        const int p = *fix_point;
        if (p < 0 || p >= nn) throw ConfigError("fix_point node index out of range");
        const NodeJet& j = base.immersion->jets[p];
        Mat3 F;
        F.col(0) = j.dy[0];
        F.col(1) = j.dy[1];
        F.col(2) = base.forms->points[p].n;
        const Eigen::SelfAdjointEigenSolver<Mat3> eig(F.transpose() * F);
        const double cond = std::sqrt(eig.eigenvalues()(2) / eig.eigenvalues()(0));
        if (!(cond < 1e8)) throw NumericalError("ill-conditioned frame at fix point (condition " + std::to_string(cond) + ")");
        sys.fix_point = p;
        // rows scaled to ambient lengths so that they read as components of ż
        std::vector<Triplet> tr{{0, 3 * p, j.dy[0].norm()}, {1, 3 * p + 1, j.dy[1].norm()}, {2, 3 * p + 2, 1.0}};
        sys.constraint.resize(3, 3 * nn);
        sys.constraint.setFromTriplets(tr.begin(), tr.end());
        sys.constraint_rhs.assign(3, 0.0);
    } else {
        sys.constraint.resize(0, 3 * nn);
    }
    return sys;
}

std::array<DeformationField, 3> translation_fields(const BaseSurface& base)
{
    std::array<DeformationField, 3> out;
    for (int s = 0; s < 3; ++s) {
        std::vector<Vec3> z(base.num_nodes(), Vec3::Unit(s));
        out[s] = frame_components(*base.immersion, *base.forms, z);
    }
    return out;
}

ExpansionCheck remainder_check(const BaseSurface& base, DeformationKind kind, const LinearSystem& sys,
                               const DeformationField& direction, const std::vector<double>& scales)
{
    const auto d = stack_field(direction);
    Eigen::Map<const Eigen::VectorXd> dv(d.data(), static_cast<Eigen::Index>(d.size()));
    const Eigen::VectorXd Ld = sys.interior * dv;

    ExpansionCheck out;
    out.scales = scales;
    for (double s : scales) {
        DeformationField f = direction;
        for (int p = 0; p < f.num_nodes(); ++p) {
            f.a1[p] *= s;
            f.a2[p] *= s;
            f.c[p] *= s;
        }
        const auto R = full_residual(base, kind, f);
        Eigen::Map<const Eigen::VectorXd> Rv(R.data(), static_cast<Eigen::Index>(R.size()));
        out.remainder.push_back((Rv - s * Ld).norm());
    }
    // log-log least-squares slope
    const int m = static_cast<int>(scales.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        const double x = std::log(scales[i]), y = std::log(out.remainder[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

} // namespace rdeform
