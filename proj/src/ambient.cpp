#include "rdeform/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdeform {

namespace {

using Jet2 = Taylor<3, 2>;
using Jet1 = Taylor<3, 1>;

std::string format_point(const Vec3& y)
{
    std::ostringstream os;
    os.precision(6);
    os << "(" << y[0] << ", " << y[1] << ", " << y[2] << ")";
    return os.str();
}

} // namespace

MetricField MetricField::euclidean(double bound)
{
    MetricField m;
    m.kind_ = MetricKind::Euclidean;
    m.bound_ = bound;
    return m;
}

MetricField MetricField::constant_curvature(double kappa, double bound)
{
    MetricField m;
    m.kind_ = MetricKind::ConstantCurvature;
    m.kappa_ = kappa;
    m.bound_ = bound;
    // 1 + kappa r^2/4 must stay positive on the working ball.
    if (1.0 + kappa * kWorkingRadius * kWorkingRadius / 4.0 <= 0.0) {
        throw ConfigError("metric not positive definite: conformal factor vanishes inside |y| <= 8 for kappa = " +
                          std::to_string(kappa));
    }
    return m;
}

MetricField MetricField::custom(const MetricCoeffTable& coeffs, double bound)
{
    MetricField m;
    m.kind_ = MetricKind::CustomPolynomial;
    m.bound_ = bound;
    m.coeffs_ = coeffs;
    for (int diag : {0, 3, 5})
        if (m.coeffs_[diag].empty()) m.coeffs_[diag].push_back({0, 0, 0, 1.0});
    for (const auto& comp : m.coeffs_)
        for (const auto& t : comp)
            if (t.p < 0 || t.q < 0 || t.r < 0 || t.p + t.q + t.r > 4)
                throw ConfigError("custom metric terms must have total degree 0..4");
    m.validate_positive_definite();
    return m;
}

void MetricField::validate_positive_definite() const
{
    const int n = 17;
    const double R = kWorkingRadius;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Vec3 y(-R + 2 * R * i / (n - 1), -R + 2 * R * j / (n - 1), -R + 2 * R * k / (n - 1));
                if (y.norm() > R) continue;
                auto a = tensor<double>({y[0], y[1], y[2]});
                Mat3 A;
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) A(r, c) = a[r][c];
                Eigen::SelfAdjointEigenSolver<Mat3> es(A, Eigen::EigenvaluesOnly);
                if (es.eigenvalues().minCoeff() <= 0.0)
                    throw ConfigError("metric not positive definite at y=" + format_point(y));
            }
}

void MetricField::check_region(const Vec3& y) const
{
    if (!(y.norm() <= kWorkingRadius))
        throw NumericalError("point " + format_point(y) + " outside the working region |y| <= 8");
}

Mat3 MetricField::metric_at(const Vec3& y) const
{
    check_region(y);
    auto a = tensor<double>({y[0], y[1], y[2]});
    Mat3 A;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) A(r, c) = a[r][c];
    return A;
}

MetricDerivatives MetricField::metric_derivatives_at(const Vec3& y) const
{
    check_region(y);
    MetricDerivatives d{};
    if (kind_ == MetricKind::Euclidean) {
        for (auto& m : d.first) m.setZero();
        for (auto& row : d.second)
            for (auto& m : row) m.setZero();
        return d;
    }
    std::array<Jet2, 3> yj{Jet2::variable(0, y[0]), Jet2::variable(1, y[1]), Jet2::variable(2, y[2])};
    auto a = tensor<Jet2>(yj);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (int g = 0; g < 3; ++g) {
                std::array<int, 3> e{};
                e[g] = 1;
                d.first[g](r, c) = a[r][c].derivative(e);
                for (int h = 0; h < 3; ++h) {
                    std::array<int, 3> e2{};
                    e2[g] += 1;
                    e2[h] += 1;
                    d.second[g][h](r, c) = a[r][c].derivative(e2);
                }
            }
    return d;
}

Christoffel MetricField::christoffel_at(const Vec3& y) const
{
    check_region(y);
    Christoffel G{};
    if (kind_ == MetricKind::Euclidean) {
        for (auto& m : G) m.setZero();
        return G;
    }
    std::array<Jet1, 3> yj{Jet1::variable(0, y[0]), Jet1::variable(1, y[1]), Jet1::variable(2, y[2])};
    auto a = tensor<Jet1>(yj);
    Mat3 A;
    std::array<Mat3, 3> dA; // dA[g](r,c)
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            A(r, c) = a[r][c].value();
            for (int g = 0; g < 3; ++g) {
                std::array<int, 3> e{};
                e[g] = 1;
                dA[g](r, c) = a[r][c].derivative(e);
            }
        }
    Eigen::FullPivLU<Mat3> lu(A);
    if (!lu.isInvertible()) throw NumericalError("singular metric at y=" + format_point(y));
    const Mat3 Ainv = lu.inverse();
    // first kind: [bc, d] = (d_b a_dc + d_c a_db - d_d a_bc) / 2
    for (int al = 0; al < 3; ++al) G[al].setZero();
    for (int b = 0; b < 3; ++b)
        for (int c = b; c < 3; ++c) {
            Vec3 first;
            for (int dd = 0; dd < 3; ++dd) first[dd] = 0.5 * (dA[b](dd, c) + dA[c](dd, b) - dA[dd](b, c));
            const Vec3 second = Ainv * first;
            for (int al = 0; al < 3; ++al) {
                G[al](b, c) = second[al];
                G[al](c, b) = second[al];
            }
        }
    return G;
}

MetricBoundReport MetricField::verify_bounds(int lattice) const
{
    MetricBoundReport rep;
    rep.bound = bound_;
    const double R = kWorkingRadius;
    for (int i = 0; i < lattice; ++i)
        for (int j = 0; j < lattice; ++j)
            for (int k = 0; k < lattice; ++k) {
                Vec3 y(-R + 2 * R * i / (lattice - 1), -R + 2 * R * j / (lattice - 1),
                       -R + 2 * R * k / (lattice - 1));
                if (y.norm() > R) continue;
                ++rep.samples;
                const Mat3 A = metric_at(y);
                const auto d = metric_derivatives_at(y);
                rep.max_value = std::max(rep.max_value, A.cwiseAbs().maxCoeff());
                for (int g = 0; g < 3; ++g) {
                    rep.max_first = std::max(rep.max_first, d.first[g].cwiseAbs().maxCoeff());
                    for (int h = 0; h < 3; ++h)
                        rep.max_second = std::max(rep.max_second, d.second[g][h].cwiseAbs().maxCoeff());
                }
            }
    rep.pass = rep.max_value <= bound_ && rep.max_first <= bound_ && rep.max_second <= bound_;
    return rep;
}

double ambient_dot(const MetricField& metric, const Vec3& y, const Vec3& u, const Vec3& v)
{
    if (metric.is_flat()) return u.dot(v);
    return u.dot(metric.metric_at(y) * v);
}

Vec3 parallel_transport(const MetricField& metric, std::span<const Vec3> path, const Vec3& v0, int substeps)
{
    if (path.empty()) throw NumericalError("parallel_transport: empty path");
    for (const auto& p : path)
        if (!(p.norm() <= MetricField::kWorkingRadius))
            throw NumericalError("parallel_transport: path leaves the working region at " + format_point(p));
    if (metric.is_flat() || path.size() < 2) return v0;

    auto rhs = [&](const Vec3& u, const Vec3& du, const Vec3& v) {
        const Christoffel G = metric.christoffel_at(u);
        Vec3 out;
        for (int a = 0; a < 3; ++a) out[a] = -du.dot(G[a] * v);
        return out;
    };

    Vec3 v = v0;
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const Vec3 p0 = path[s];
        const Vec3 du = path[s + 1] - path[s]; // du/dtau on tau in [0,1]
        if (du.squaredNorm() == 0.0) continue;
        const double h = 1.0 / substeps;
        for (int k = 0; k < substeps; ++k) {
            const double t = k * h;
            const Vec3 k1 = rhs(p0 + t * du, du, v);
            const Vec3 k2 = rhs(p0 + (t + 0.5 * h) * du, du, v + 0.5 * h * k1);
            const Vec3 k3 = rhs(p0 + (t + 0.5 * h) * du, du, v + 0.5 * h * k2);
            const Vec3 k4 = rhs(p0 + (t + h) * du, du, v + h * k3);
            v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return v;
}

} // namespace rdeform
