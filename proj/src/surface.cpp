#include "rdeform/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace rdeform {

namespace {

using T3 = Taylor<2, 3>;

template <class T>
using Vec3T = std::array<T, 3>;

template <class T>
T det3(const std::array<std::array<T, 3>, 3>& a)
{
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

// Inverse of a symmetric 3x3 tensor by cofactors.
template <class T>
std::array<std::array<T, 3>, 3> inverse3(const std::array<std::array<T, 3>, 3>& a)
{
    std::array<std::array<T, 3>, 3> c{};
    c[0][0] = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    c[0][1] = a[0][2] * a[2][1] - a[0][1] * a[2][2];
    c[0][2] = a[0][1] * a[1][2] - a[0][2] * a[1][1];
    c[1][0] = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    c[1][1] = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    c[1][2] = a[0][2] * a[1][0] - a[0][0] * a[1][2];
    c[2][0] = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    c[2][1] = a[0][1] * a[2][0] - a[0][0] * a[2][1];
    c[2][2] = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const T inv_det = 1.0 / det3(a);
    for (auto& row : c)
        for (auto& x : row) x = x * inv_det;
    return c;
}

// Unit normal n^a = a^{ab} N_b / |N| with N_b = ε_bcd y1^c y2^d.
template <class T>
Vec3T<T> unit_normal(const MetricField& metric, const Vec3T<T>& y, const Vec3T<T>& y1, const Vec3T<T>& y2)
{
    using std::sqrt;
    const Vec3T<T> N{y1[1] * y2[2] - y1[2] * y2[1], y1[2] * y2[0] - y1[0] * y2[2], y1[0] * y2[1] - y1[1] * y2[0]};
    Vec3T<T> n;
    if (metric.is_flat()) {
        n = N;
    } else {
        const auto ainv = inverse3(metric.tensor<T>(y));
        for (int a = 0; a < 3; ++a) n[a] = ainv[a][0] * N[0] + ainv[a][1] * N[1] + ainv[a][2] * N[2];
    }
    T norm2 = n[0] * N[0] + n[1] * N[1] + n[2] * N[2];
    T inv = 1.0 / sqrt(norm2);
    for (auto& x : n) x = x * inv;
    return n;
}

Vec3 to_vec(const Vec3T<double>& v) { return {v[0], v[1], v[2]}; }
Vec3T<double> to_arr(const Vec3& v) { return {v[0], v[1], v[2]}; }

std::string where(const Immersion& im, int p)
{
    std::ostringstream os;
    os.precision(4);
    os << "node " << p << " (r=" << im.grid->r(p) << ", theta=" << im.grid->theta(p) << ")";
    return os.str();
}

void check_rank(const Immersion& im)
{
    double scale = 0.0;
    for (const auto& j : im.jets) scale = std::max({scale, j.dy[0].norm(), j.dy[1].norm()});
    for (int p = 0; p < im.num_nodes(); ++p) {
        const auto& j = im.jets[p];
        if (!(j.dy[0].cross(j.dy[1]).norm() > 1e-10 * scale * scale))
            throw NumericalError("immersion degenerate (Jacobian rank < 2) at " + where(im, p));
    }
}

const std::array<std::array<int, 2>, 3> kSecond = {{{2, 0}, {1, 1}, {0, 2}}};
const std::array<std::array<int, 2>, 4> kThird = {{{3, 0}, {2, 1}, {1, 2}, {0, 3}}};

// Node jet as a degree-3 Taylor polynomial in the local coordinate offset.
std::array<T3, 3> taylor_from_jet(const NodeJet& jet)
{
    std::array<T3, 3> y;
    for (int s = 0; s < 3; ++s) {
        y[s] = T3(jet.y[s]);
        y[s].set_derivative({1, 0}, jet.dy[0][s]);
        y[s].set_derivative({0, 1}, jet.dy[1][s]);
        for (int k = 0; k < 3; ++k) y[s].set_derivative(kSecond[k], jet.d2y[k][s]);
        for (int k = 0; k < 4; ++k) y[s].set_derivative(kThird[k], jet.d3y[k][s]);
    }
    return y;
}

PointForms forms_at_node(const Immersion& im, const MetricField& metric, int p)
{
    const NodeJet& jet = im.jets[p];
    PointForms pf = point_forms(metric, jet.y, jet.dy, jet.d2y);

    const auto yT = taylor_from_jet(jet);
    Vec3T<T3> y1T, y2T;
    for (int s = 0; s < 3; ++s) {
        y1T[s] = yT[s].differentiate(0);
        y2T[s] = yT[s].differentiate(1);
    }
    auto nT = unit_normal<T3>(metric, yT, y1T, y2T);
    const Vec3 n0(nT[0].value(), nT[1].value(), nT[2].value());
    const double sign = n0.dot(pf.n) < 0.0 ? -1.0 : 1.0;
    for (int s = 0; s < 3; ++s) {
        pf.dn[0][s] = sign * nT[s].derivative({1, 0});
        pf.dn[1][s] = sign * nT[s].derivative({0, 1});
        for (int k = 0; k < 3; ++k) pf.d2n[k][s] = sign * nT[s].derivative(kSecond[k]);
    }
    return pf;
}

void check_admitted(const Immersion& im, const FundamentalForms& f)
{
    for (int p = 0; p < static_cast<int>(f.points.size()); ++p) {
        const auto& pf = f.points[p];
        if (!(pf.k1 > 0.0 && pf.k2 > 0.0 && pf.H > 0.0)) {
            std::ostringstream os;
            os << "surface not admitted: k1=" << pf.k1 << ", k2=" << pf.k2 << ", H=" << pf.H << " at "
               << where(im, p);
            throw AdmittanceError(os.str());
        }
    }
}

} // namespace

Chart Chart::spherical_cap(double radius, double extent, CapParameterization param)
{
    Chart c;
    c.kind = ChartKind::SphericalCap;
    c.radius = radius;
    c.cap_extent = extent;
    c.cap_param = param;
    c.validate();
    return c;
}

Chart Chart::stereographic_sphere(double radius, Hemisphere hemi)
{
    Chart c;
    c.kind = ChartKind::StereographicSphere;
    c.radius = radius;
    c.hemisphere = hemi;
    c.validate();
    return c;
}

Chart Chart::custom(std::array<std::vector<PolyTerm2>, 3> poly)
{
    Chart c;
    c.kind = ChartKind::CustomAnalytic;
    c.poly = std::move(poly);
    c.validate();
    return c;
}

void Chart::validate() const
{
    switch (kind) {
    case ChartKind::SphericalCap:
        if (!(radius > 0.0)) throw ConfigError("chart: radius must be > 0");
        if (!(cap_extent > 0.0 && cap_extent < std::numbers::pi / 2))
            throw ConfigError("chart: cap extent must lie in (0, pi/2)");
        break;
    case ChartKind::StereographicSphere:
        if (!(radius > 0.0)) throw ConfigError("chart: radius must be > 0");
        break;
    case ChartKind::CustomAnalytic:
        for (const auto& comp : poly)
            for (const auto& t : comp)
                if (t.p < 0 || t.q < 0) throw ConfigError("chart: negative polynomial exponent");
        break;
    }
}

DeformationField DeformationField::zeros(int nodes)
{
    DeformationField f;
    f.a1.assign(nodes, 0.0);
    f.a2.assign(nodes, 0.0);
    f.c.assign(nodes, 0.0);
    return f;
}

bool DeformationField::is_zero() const
{
    auto zero = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); };
    return zero(a1) && zero(a2) && zero(c);
}

Immersion build_immersion(const Chart& chart, std::shared_ptr<const PolarGrid> grid)
{
    chart.validate();
    Immersion im;
    im.grid = grid;
    im.chart = chart;
    im.jets.resize(grid->num_nodes());
#pragma omp parallel for schedule(static)
    for (int p = 0; p < grid->num_nodes(); ++p) {
        const T3 x1 = T3::variable(0, grid->x1(p));
        const T3 x2 = T3::variable(1, grid->x2(p));
        const auto y = chart.evaluate(x1, x2);
        NodeJet& j = im.jets[p];
        for (int s = 0; s < 3; ++s) {
            j.y[s] = y[s].value();
            j.dy[0][s] = y[s].derivative({1, 0});
            j.dy[1][s] = y[s].derivative({0, 1});
            for (int k = 0; k < 3; ++k) j.d2y[k][s] = y[s].derivative(kSecond[k]);
            for (int k = 0; k < 4; ++k) j.d3y[k][s] = y[s].derivative(kThird[k]);
        }
    }
    check_rank(im);
    return im;
}

Curvatures principal_curvatures(const Mat2& g, const Mat2& b)
{
    Curvatures c;
    const double dg = g.determinant();
    const Mat2 ginv = g.inverse();
    c.H = 0.5 * (ginv.cwiseProduct(b.transpose())).sum();
    c.K = b.determinant() / dg;
    const double disc = std::max(0.0, c.H * c.H - c.K);
    const double root = std::sqrt(disc);
    // stable root pair
    if (c.H >= 0.0) {
        c.k2 = c.H + root;
        c.k1 = c.k2 != 0.0 ? c.K / c.k2 : c.H - root;
    } else {
        c.k1 = c.H - root;
        c.k2 = c.k1 != 0.0 ? c.K / c.k1 : c.H + root;
    }
    return c;
}

PointForms point_forms(const MetricField& metric, const Vec3& y, const std::array<Vec3, 2>& dy,
                       const std::array<Vec3, 3>& d2y, const Vec3* orient)
{
    PointForms pf;
    const bool flat = metric.is_flat();
    const Mat3 A = flat ? Mat3::Identity() : metric.metric_at(y);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) pf.g(i, j) = dy[i].dot(A * dy[j]);
    pf.det_g = pf.g.determinant();
    if (!(pf.det_g > 0.0)) throw NumericalError("first fundamental form not positive definite");
    pf.sqrt_g = std::sqrt(pf.det_g);

    pf.n = to_vec(unit_normal<double>(metric, to_arr(y), to_arr(dy[0]), to_arr(dy[1])));
    Christoffel G{};
    if (!flat) G = metric.christoffel_at(y);
    const Vec3 An = A * pf.n;
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            Vec3 cov = d2y[sym2(i, j)];
            if (!flat)
                for (int a = 0; a < 3; ++a) cov[a] += dy[i].dot(G[a] * dy[j]);
            pf.b(i, j) = An.dot(cov);
            pf.b(j, i) = pf.b(i, j);
        }
    auto flip = [&] {
        pf.n = -pf.n;
        pf.b = -pf.b;
    };
    if (orient) {
        if (An.dot(*orient) < 0.0) flip();
    } else {
        const Curvatures c = principal_curvatures(pf.g, pf.b);
        if (c.H < 0.0) flip();
    }
    const Curvatures c = principal_curvatures(pf.g, pf.b);
    pf.H = c.H;
    pf.K = c.K;
    pf.k1 = c.k1;
    pf.k2 = c.k2;
    pf.V = 0.5 * (pf.b(0, 0) + pf.b(1, 1));
    return pf;
}

FundamentalForms fundamental_forms(const Immersion& im, const MetricField& metric, bool admit)
{
    FundamentalForms f;
    f.points.resize(im.num_nodes());
#pragma omp parallel for schedule(static)
    for (int p = 0; p < im.num_nodes(); ++p) f.points[p] = forms_at_node(im, metric, p);
    if (admit) check_admitted(im, f);
    f.admitted = admit;
    return f;
}

FundamentalForms fundamental_forms_serial(const Immersion& im, const MetricField& metric, bool admit)
{
    FundamentalForms f;
    f.points.resize(im.num_nodes());
    for (int p = 0; p < im.num_nodes(); ++p) f.points[p] = forms_at_node(im, metric, p);
    if (admit) check_admitted(im, f);
    f.admitted = admit;
    return f;
}

ConjugateIsothermalReport verify_conjugate_isothermal(const FundamentalForms& forms, double tol)
{
    ConjugateIsothermalReport rep;
    rep.V.reserve(forms.points.size());
    for (const auto& pf : forms.points) {
        rep.V.push_back(pf.V);
        rep.max_V = std::max(rep.max_V, std::abs(pf.V));
        rep.max_b12 = std::max(rep.max_b12, std::abs(pf.b(0, 1)));
        rep.max_b11_minus_b22 = std::max(rep.max_b11_minus_b22, std::abs(pf.b(0, 0) - pf.b(1, 1)));
    }
    rep.pass = rep.max_b12 <= tol * rep.max_V && rep.max_b11_minus_b22 <= tol * rep.max_V;
    return rep;
}

AreaReport area_element(const FundamentalForms& forms, const PolarGrid& grid)
{
    AreaReport rep;
    rep.density.resize(forms.points.size());
    const auto& w = grid.area_weights();
    // fixed summation order for reproducible totals
    for (std::size_t p = 0; p < forms.points.size(); ++p) {
        rep.density[p] = forms.points[p].sqrt_g;
        rep.total += w[p] * rep.density[p];
    }
    return rep;
}

std::vector<Vec3> ambient_field(const Immersion& im, const FundamentalForms& forms, const DeformationField& f)
{
    std::vector<Vec3> z(im.num_nodes());
    for (int p = 0; p < im.num_nodes(); ++p)
        z[p] = f.a1[p] * im.jets[p].dy[0] + f.a2[p] * im.jets[p].dy[1] + f.c[p] * forms.points[p].n;
    return z;
}

DeformationField frame_components(const Immersion& im, const FundamentalForms& forms, const std::vector<Vec3>& z)
{
    DeformationField f = DeformationField::zeros(im.num_nodes());
    for (int p = 0; p < im.num_nodes(); ++p) {
        Mat3 F;
        F.col(0) = im.jets[p].dy[0];
        F.col(1) = im.jets[p].dy[1];
        F.col(2) = forms.points[p].n;
        const Vec3 coef = F.partialPivLu().solve(z[p]);
        f.a1[p] = coef[0];
        f.a2[p] = coef[1];
        f.c[p] = coef[2];
    }
    return f;
}

NodeJet deformed_jet(const NodeJet& b, const PointForms& pf, const FieldJet& f)
{
    const double a[2] = {f[0][0], f[1][0]};
    const double da[2][2] = {{f[0][1], f[0][2]}, {f[1][1], f[1][2]}}; // da[k][i] = ∂_i a^k
    const double d2a[2][3] = {{f[0][3], f[0][4], f[0][5]}, {f[1][3], f[1][4], f[1][5]}};
    const double c = f[2][0];
    const double dc[2] = {f[2][1], f[2][2]};
    const double d2c[3] = {f[2][3], f[2][4], f[2][5]};

    NodeJet o;
    o.y = b.y + a[0] * b.dy[0] + a[1] * b.dy[1] + c * pf.n;
    for (int i = 0; i < 2; ++i) {
        Vec3 zi = dc[i] * pf.n + c * pf.dn[i];
        for (int k = 0; k < 2; ++k) zi += da[k][i] * b.dy[k] + a[k] * b.d2y[sym2(k, i)];
        o.dy[i] = b.dy[i] + zi;
    }
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            const int ij = sym2(i, j);
            Vec3 zij = d2c[ij] * pf.n + dc[i] * pf.dn[j] + dc[j] * pf.dn[i] + c * pf.d2n[ij];
            for (int k = 0; k < 2; ++k)
                zij += d2a[k][ij] * b.dy[k] + da[k][i] * b.d2y[sym2(k, j)] + da[k][j] * b.d2y[sym2(k, i)] +
                       a[k] * b.d3y[sym3(k, i, j)];
            o.d2y[ij] = b.d2y[ij] + zij;
        }
    return o;
}

std::vector<FieldJet> field_jets(const PolarGrid& grid, const DeformationField& field)
{
    const int nn = grid.num_nodes();
    if (field.num_nodes() != nn) throw NumericalError("field and grid shapes differ");
    std::vector<FieldJet> jets(nn);
    const std::array<const std::vector<double>*, 3> src{&field.a1, &field.a2, &field.c};
    for (int f = 0; f < 3; ++f)
        for (int k = 0; k < 6; ++k) {
            const auto v = k == 0 ? *src[f] : apply_op(grid.jet_op(k), *src[f]);
            for (int p = 0; p < nn; ++p) jets[p][f][k] = v[p];
        }
    return jets;
}

Immersion deform_immersion(const Immersion& base, const FundamentalForms& bf, const DeformationField& field)
{
    const PolarGrid& grid = *base.grid;
    const int nn = base.num_nodes();
    if (field.num_nodes() != nn) throw NumericalError("deform_immersion: field and immersion shapes differ");
    const auto jets = field_jets(grid, field);

    Immersion out;
    out.grid = base.grid;
    out.jets.resize(nn);
#pragma omp parallel for schedule(static)
    for (int p = 0; p < nn; ++p) out.jets[p] = deformed_jet(base.jets[p], bf.points[p], jets[p]);

    // third derivatives of the deformed immersion: differentiate d2y grids
    for (int s = 0; s < 3; ++s) {
        std::vector<double> y11(nn), y12(nn), y22(nn);
        for (int p = 0; p < nn; ++p) {
            y11[p] = out.jets[p].d2y[0][s];
            y12[p] = out.jets[p].d2y[1][s];
            y22[p] = out.jets[p].d2y[2][s];
        }
        const auto t111 = apply_op(grid.d1(), y11);
        const auto t112 = apply_op(grid.d1(), y12);
        const auto t122 = apply_op(grid.d2(), y12);
        const auto t222 = apply_op(grid.d2(), y22);
        for (int p = 0; p < nn; ++p) {
            out.jets[p].d3y[0][s] = t111[p];
            out.jets[p].d3y[1][s] = t112[p];
            out.jets[p].d3y[2][s] = t122[p];
            out.jets[p].d3y[3][s] = t222[p];
        }
    }
    check_rank(out);
    return out;
}

} // namespace rdeform
