#pragma once

// Discretized disk-type immersions, their fundamental forms, curvatures and
// area elements, and deformation fields z = a^j y_{,j} + c n.

#include "rdeform/ambient.hpp"
#include "rdeform/polar_grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace rdeform {

using Mat2 = Eigen::Matrix2d;

enum class ChartKind { SphericalCap, StereographicSphere, CustomAnalytic };
enum class CapParameterization { Stereographic, Azimuthal };
enum class Hemisphere { South, North };

// c * x1^p x2^q
struct PolyTerm2 {
    int p = 0, q = 0;
    double coef = 0.0;
};

struct Chart {
    ChartKind kind = ChartKind::StereographicSphere;
    double radius = 1.0;
    double cap_extent = 0.0; // polar angle of the cap boundary, SphericalCap only
    CapParameterization cap_param = CapParameterization::Stereographic;
    Hemisphere hemisphere = Hemisphere::South;
    std::array<std::vector<PolyTerm2>, 3> poly{}; // CustomAnalytic components y^1..y^3
    Vec3 offset = Vec3::Zero();                   // constant ambient translation

    static Chart spherical_cap(double radius, double extent,
                               CapParameterization param = CapParameterization::Stereographic);
    static Chart stereographic_sphere(double radius, Hemisphere hemi = Hemisphere::South);
    static Chart custom(std::array<std::vector<PolyTerm2>, 3> poly);

    // Throws ConfigError on invalid parameters.
    void validate() const;

    template <class T>
    std::array<T, 3> evaluate(const T& x1, const T& x2) const;
};

// Immersion data at one node: position and partial derivatives in the
// Cartesian disk coordinates. Second derivatives are ordered 11, 12, 22;
// third derivatives 111, 112, 122, 222.
struct NodeJet {
    Vec3 y = Vec3::Zero();
    std::array<Vec3, 2> dy{Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 3> d2y{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 4> d3y{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

inline int sym2(int i, int j) { return i + j; }         // (i,j) -> 0:11, 1:12, 2:22
inline int sym3(int i, int j, int k) { return i + j + k; } // count of index 2

struct Immersion {
    std::shared_ptr<const PolarGrid> grid;
    std::optional<Chart> chart; // set for analytic charts
    std::vector<NodeJet> jets;

    int num_nodes() const { return static_cast<int>(jets.size()); }
};

// Per-node fundamental data. The normal jets (dn, d2n) are exact derivatives
// of the unit normal field computed from the immersion jets.
struct PointForms {
    Mat2 g = Mat2::Zero();
    Mat2 b = Mat2::Zero();
    double det_g = 0.0;
    double sqrt_g = 0.0;
    Vec3 n = Vec3::Zero();
    std::array<Vec3, 2> dn{Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 3> d2n{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    double H = 0.0, K = 0.0, k1 = 0.0, k2 = 0.0;
    double V = 0.0; // (b11 + b22)/2
};

struct FundamentalForms {
    std::vector<PointForms> points;
    bool admitted = false;
};

struct Curvatures {
    double k1 = 0.0, k2 = 0.0, H = 0.0, K = 0.0;
};

struct ConjugateIsothermalReport {
    double max_b12 = 0.0;
    double max_b11_minus_b22 = 0.0;
    double max_V = 0.0;
    std::vector<double> V;
    bool pass = false;
};

struct AreaReport {
    std::vector<double> density; // sqrt(g) per node
    double total = 0.0;
};

struct DeformationField {
    std::vector<double> a1, a2, c;

    static DeformationField zeros(int nodes);
    int num_nodes() const { return static_cast<int>(a1.size()); }
    bool is_zero() const;
};

Immersion build_immersion(const Chart& chart, std::shared_ptr<const PolarGrid> grid);

// Unit normal, forms and curvatures at a single point from position jets.
// The normal sign is chosen so that a(n, orient) >= 0 when `orient` is given,
// otherwise so that H >= 0.
PointForms point_forms(const MetricField& metric, const Vec3& y, const std::array<Vec3, 2>& dy,
                       const std::array<Vec3, 3>& d2y, const Vec3* orient = nullptr);

// Full forms including exact normal jets. With `admit` set, throws
// AdmittanceError unless k1, k2, H > 0 everywhere.
FundamentalForms fundamental_forms(const Immersion& im, const MetricField& metric, bool admit = true);
// Reference implementation without OpenMP, kept for testing.
FundamentalForms fundamental_forms_serial(const Immersion& im, const MetricField& metric, bool admit = true);

Curvatures principal_curvatures(const Mat2& g, const Mat2& b);

ConjugateIsothermalReport verify_conjugate_isothermal(const FundamentalForms& forms, double tol);

AreaReport area_element(const FundamentalForms& forms, const PolarGrid& grid);

// Ambient rate/displacement vectors z = a^j y_{,j} + c n per node.
std::vector<Vec3> ambient_field(const Immersion& im, const FundamentalForms& forms, const DeformationField& f);

// Projects an ambient vector field onto the frame {y_{,1}, y_{,2}, n}.
DeformationField frame_components(const Immersion& im, const FundamentalForms& forms,
                                  const std::vector<Vec3>& z);

// Jet of the deformation field at one node: rows a1, a2, c; columns value,
// ∂1, ∂2, ∂11, ∂12, ∂22.
using FieldJet = std::array<std::array<double, 6>, 3>;

// Position, first and second derivatives of y + z at one node by the product
// rule from the base jets (third derivatives are left zero).
NodeJet deformed_jet(const NodeJet& base, const PointForms& base_pf, const FieldJet& f);

// Field jets at every node from the discrete derivative operators.
std::vector<FieldJet> field_jets(const PolarGrid& grid, const DeformationField& field);

// y + z with derivatives recomputed from the differentiated (a, c) grids and
// the base frame jets. Throws NumericalError if the Jacobian loses rank.
Immersion deform_immersion(const Immersion& base, const FundamentalForms& base_forms,
                           const DeformationField& field);

// ------------------------------------------------------------------ impl

namespace detail {

template <class T>
T poly_eval(const std::vector<PolyTerm2>& terms, const T& x1, const T& x2)
{
    T s(0.0);
    for (const auto& t : terms) {
        T m(t.coef);
        for (int k = 0; k < t.p; ++k) m = m * x1;
        for (int k = 0; k < t.q; ++k) m = m * x2;
        s = s + m;
    }
    return s;
}

// sin(sqrt(u))/sqrt(u) and cos(sqrt(u)) as power series in u.
template <class T>
std::array<T, 2> sinc_cos_sqrt(const T& u)
{
    T s(0.0), c(0.0), term(1.0);
    double fs = 1.0, fc = 1.0; // (2k+1)!, (2k)!
    for (int k = 0; k < 24; ++k) {
        if (k > 0) {
            term = term * u;
            fs *= (2.0 * k) * (2.0 * k + 1.0);
            fc *= (2.0 * k - 1.0) * (2.0 * k);
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        s = s + term * (sign / fs);
        c = c + term * (sign / fc);
    }
    return {s, c};
}

} // namespace detail

template <class T>
std::array<T, 3> Chart::evaluate(const T& x1, const T& x2) const
{
    std::array<T, 3> y{};
    switch (kind) {
    case ChartKind::StereographicSphere:
    case ChartKind::SphericalCap: {
        if (kind == ChartKind::SphericalCap && cap_param == CapParameterization::Azimuthal) {
            // geodesic polar angle proportional to |x|
            T u = (x1 * x1 + x2 * x2) * (cap_extent * cap_extent);
            auto sc = detail::sinc_cos_sqrt(u);
            y[0] = sc[0] * x1 * (radius * cap_extent);
            y[1] = sc[0] * x2 * (radius * cap_extent);
            y[2] = sc[1] * (-radius);
            break;
        }
        const double scale = kind == ChartKind::SphericalCap ? std::tan(cap_extent / 2.0) : 1.0;
        T u1 = x1 * scale;
        T u2 = x2 * scale;
        T q = u1 * u1 + u2 * u2;
        T inv = 1.0 / (1.0 + q);
        if (hemisphere == Hemisphere::South) {
            y[0] = u1 * inv * (2.0 * radius);
            y[1] = u2 * inv * (2.0 * radius);
            y[2] = (q - 1.0) * inv * radius;
        } else {
            y[0] = u1 * inv * (2.0 * radius);
            y[1] = u2 * inv * (-2.0 * radius);
            y[2] = (1.0 - q) * inv * radius;
        }
        break;
    }
    case ChartKind::CustomAnalytic:
        for (int s = 0; s < 3; ++s) y[s] = detail::poly_eval(poly[s], x1, x2);
        break;
    }
    for (int s = 0; s < 3; ++s) y[s] = y[s] + offset[s];
    return y;
}

} // namespace rdeform
