#pragma once

// Ambient Riemannian 3-space: metric tensor families, their derivatives,
// Levi-Civita connection and parallel transport along polygonal paths.

#include "rdeform/errors.hpp"
#include "rdeform/taylor.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace rdeform {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class MetricKind { Euclidean, ConstantCurvature, CustomPolynomial };

// One monomial c * y1^p y2^q y3^r of a metric component.
struct PolyTerm3 {
    int p = 0, q = 0, r = 0;
    double coef = 0.0;
};

// Component order of the symmetric tensor: 11, 12, 13, 22, 23, 33.
using MetricCoeffTable = std::array<std::vector<PolyTerm3>, 6>;

struct MetricDerivatives {
    std::array<Mat3, 3> first;                 // first[g](a,b) = d_g a_ab
    std::array<std::array<Mat3, 3>, 3> second; // second[g][d](a,b)
};

// Gamma[a](b,c) = Γ^a_{bc}
using Christoffel = std::array<Mat3, 3>;

struct MetricBoundReport {
    double max_value = 0.0;
    double max_first = 0.0;
    double max_second = 0.0;
    double bound = 0.0;
    int samples = 0;
    bool pass = false;
};

class MetricField {
public:
    static constexpr double kWorkingRadius = 8.0;

    static MetricField euclidean(double bound = 10.0);
    // Conformal model a_ab = delta_ab / (1 + kappa |y|^2 / 4)^2.
    static MetricField constant_curvature(double kappa, double bound = 10.0);
    // Components not listed in `coeffs` default to the identity entry.
    // Throws ConfigError if the tensor is not positive definite on the
    // working region lattice.
    static MetricField custom(const MetricCoeffTable& coeffs, double bound = 10.0);

    MetricKind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    double bound() const { return bound_; }
    const MetricCoeffTable& coefficients() const { return coeffs_; }
    bool is_flat() const { return kind_ == MetricKind::Euclidean; }

    // Component evaluation templated on the scalar type (double or Taylor).
    template <class T>
    std::array<std::array<T, 3>, 3> tensor(const std::array<T, 3>& y) const;

    Mat3 metric_at(const Vec3& y) const;
    MetricDerivatives metric_derivatives_at(const Vec3& y) const;
    Christoffel christoffel_at(const Vec3& y) const;

    // Samples a 17^3 lattice of the working ball and checks the M0 caps.
    MetricBoundReport verify_bounds(int lattice = 17) const;

private:
    MetricField() = default;
    void check_region(const Vec3& y) const;
    void validate_positive_definite() const;

    MetricKind kind_ = MetricKind::Euclidean;
    double kappa_ = 0.0;
    double bound_ = 10.0;
    MetricCoeffTable coeffs_{};
};

// Ambient inner product a_ab u^a v^b at point y.
double ambient_dot(const MetricField& metric, const Vec3& y, const Vec3& u, const Vec3& v);

// Transports v0 along the polygonal path through `path` (>= 2 points, or a
// single point for the zero-length path) solving
//   dv^a/dtau + Γ^a_bc du^b/dtau v^c = 0
// with the classical fourth-order Runge-Kutta method and `substeps` steps per
// segment.
Vec3 parallel_transport(const MetricField& metric, std::span<const Vec3> path, const Vec3& v0,
                        int substeps = 32);

// ------------------------------------------------------------------ impl

template <class T>
std::array<std::array<T, 3>, 3> MetricField::tensor(const std::array<T, 3>& y) const
{
    std::array<std::array<T, 3>, 3> a{};
    switch (kind_) {
    case MetricKind::Euclidean:
        for (int i = 0; i < 3; ++i) a[i][i] = T(1.0);
        break;
    case MetricKind::ConstantCurvature: {
        T r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        T f = 1.0 + r2 * (kappa_ / 4.0);
        T w = 1.0 / (f * f);
        for (int i = 0; i < 3; ++i) a[i][i] = w;
        break;
    }
    case MetricKind::CustomPolynomial: {
        static constexpr int idx[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
        for (int c = 0; c < 6; ++c) {
            T s(0.0);
            for (const auto& term : coeffs_[c]) {
                T m(term.coef);
                for (int k = 0; k < term.p; ++k) m = m * y[0];
                for (int k = 0; k < term.q; ++k) m = m * y[1];
                for (int k = 0; k < term.r; ++k) m = m * y[2];
                s = s + m;
            }
            a[idx[c][0]][idx[c][1]] = s;
            a[idx[c][1]][idx[c][0]] = s;
        }
        break;
    }
    }
    return a;
}

} // namespace rdeform
