#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rdeform;
using std::numbers::pi;

namespace {

const DeformationKind kKinds[] = {DeformationKind::Ch, DeformationKind::H, DeformationKind::A, DeformationKind::K};

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

DeformationField scaled(DeformationField f, double s)
{
    for (auto* comp : {&f.a1, &f.a2, &f.c})
        for (double& v : *comp) v *= s;
    return f;
}

} // namespace

TEST_CASE("kind names round-trip")
{
    for (DeformationKind k : kKinds) CHECK(parse_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_kind("Q"), ConfigError);
}

TEST_CASE("field stacking round-trips")
{
    const PolarGrid grid(GridSpec{8, 16});
    std::mt19937 rng(1);
    const DeformationField f = test::random_field(grid, rng, 1.0);
    const DeformationField g = unstack_field(stack_field(f));
    CHECK(g.a1 == f.a1);
    CHECK(g.a2 == f.a2);
    CHECK(g.c == f.c);
}

TEST_CASE("Fourier series evaluation")
{
    FourierSeries s;
    s.cos_coef = {0.5, 0.0, 2.0};
    s.sin_coef = {0.0, -1.0};
    const double t = 0.7;
    CHECK(s(t) == doctest::Approx(0.5 + 2.0 * std::cos(2 * t) - std::sin(t)));
    CHECK(FourierSeries{}.is_zero());
    CHECK_FALSE(s.is_zero());
}

TEST_CASE("the zero field has zero residual")
{
    test::CapFixture cap;
    for (DeformationKind k : kKinds)
        CHECK(max_abs(full_residual(cap.base, k, DeformationField::zeros(cap.grid->num_nodes()))) < 1e-13);
}

TEST_CASE("ambient translations are exact deformations")
{
    // The frame components of a translation are not polynomial in the disk
    // coordinates, so their residual is stencil truncation and must shrink
    // quickly under refinement.
    auto worst = [](GridSpec spec, DeformationKind k, double& nonlinear) {
        test::CapFixture cap(spec);
        const LinearSystem ls = assemble_linear_system(cap.base, k, std::nullopt, std::nullopt);
        double linear = 0.0;
        nonlinear = 0.0;
        for (const auto& t : translation_fields(cap.base)) {
            const auto x = stack_field(t);
            const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
            linear = std::max(linear, (ls.interior * xv).cwiseAbs().maxCoeff());
            nonlinear = std::max(nonlinear, max_abs(full_residual(cap.base, k, scaled(t, 0.1))));
        }
        return linear;
    };
    for (DeformationKind k : kKinds) {
        double n_coarse = 0.0, n_fine = 0.0;
        const double coarse = worst({8, 32}, k, n_coarse), fine = worst({16, 64}, k, n_fine);
        CAPTURE(to_string(k));
        CAPTURE(coarse);
        CAPTURE(fine);
        CHECK(fine < 1e-4);
        CHECK(fine < coarse / 8.0);
        CHECK(n_fine < 1e-4);
        CHECK(n_fine < n_coarse / 8.0);
    }
}

TEST_CASE("interior operator is the derivative of the residual (property)")
{
    test::CapFixture cap;
    std::mt19937 rng(5);
    for (DeformationKind k : kKinds) {
        const LinearSystem ls = assemble_linear_system(cap.base, k, std::nullopt, std::nullopt);
        for (int trial = 0; trial < 3; ++trial) {
            const DeformationField d = test::random_field(*cap.grid, rng, 0.3);
            const double eps = 1e-4;
            const auto rp = full_residual(cap.base, k, scaled(d, eps));
            const auto rm = full_residual(cap.base, k, scaled(d, -eps));
            const auto x = stack_field(d);
            const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
            const Eigen::VectorXd lx = ls.interior * xv;
            double err = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < rp.size(); ++i) {
                err = std::max(err, std::abs((rp[i] - rm[i]) / (2 * eps) - lx(static_cast<Eigen::Index>(i))));
                scale = std::max(scale, std::abs(lx(static_cast<Eigen::Index>(i))));
            }
            CHECK(err <= 1e-6 * scale);
        }
    }
}

TEST_CASE("remainder of the linearization is second order")
{
    test::CapFixture cap;
    std::mt19937 rng(9);
    const DeformationField d = test::random_field(*cap.grid, rng, 0.3);
    const LinearSystem ls = assemble_linear_system(cap.base, DeformationKind::H, std::nullopt, std::nullopt);
    const ExpansionCheck ec = remainder_check(cap.base, DeformationKind::H, ls, d, {1e-1, 3e-2, 1e-2, 3e-3});
    CHECK(ec.fitted_order > 1.9);
    CHECK(ec.fitted_order < 2.2);
}

TEST_CASE("serial and parallel kernels agree exactly")
{
    test::CapFixture cap({8, 32}, 1.0, pi / 4, MetricField::constant_curvature(0.5));
    std::mt19937 rng(2);
    const DeformationField f = test::random_field(*cap.grid, rng, 0.05);
    for (DeformationKind k : kKinds) {
        CHECK(full_residual(cap.base, k, f) == full_residual_serial(cap.base, k, f));
        const auto a = jet_jacobians(cap.base, k, &f), b = jet_jacobians_serial(cap.base, k, &f);
        CHECK(a == b);
    }
}

TEST_CASE("boundary index of the cap tangent fields")
{
    test::CapFixture cap;
    for (int n : {1, 0, -1}) {
        const BoundaryCondition bc = boundary_coefficients(cap.im, cap.metric, test::cap_boundary(n));
        CHECK(bc.index == n);
        CHECK(bc.nodes.size() == 32u);
        for (const auto& lam : bc.lambda) CHECK(std::abs(lam) == doctest::Approx(1.0));
    }
    // a tangent field that vanishes somewhere on the boundary is rejected
    BoundaryData degenerate;
    degenerate.l1.cos_coef = {0, 1};
    CHECK_THROWS_AS(boundary_coefficients(cap.im, cap.metric, degenerate), NumericalError);
}

TEST_CASE("index of synthetic boundary coefficients (property)")
{
    const PolarGrid grid(GridSpec{8, 64});
    for (int k = -3; k <= 3; ++k) {
        std::vector<std::array<double, 2>> lt;
        for (int p : grid.boundary_nodes()) lt.push_back({std::cos(k * grid.theta(p)), -std::sin(k * grid.theta(p))});
        CHECK(boundary_from_lambda_tilde(grid, lt).index == k);
    }
}

TEST_CASE("assembly requires a conjugate-isothermal base")
{
    auto grid = std::make_shared<PolarGrid>(GridSpec{8, 32});
    const MetricField m = MetricField::euclidean();
    const Immersion im =
        build_immersion(Chart::custom({{{{1, 0, 1.0}}, {{0, 1, 1.0}}, {{2, 0, 0.5}, {0, 2, 1.0}}}}), grid);
    const FundamentalForms forms = fundamental_forms(im, m);
    const BaseSurface base{&im, &forms, &m};
    CHECK_THROWS_AS(assemble_linear_system(base, DeformationKind::H, std::nullopt, std::nullopt), AdmittanceError);
}

TEST_CASE("fix point adds three constraint rows")
{
    test::CapFixture cap;
    const BoundaryCondition bc = boundary_coefficients(cap.im, cap.metric, test::cap_boundary(1));
    const LinearSystem ls = assemble_linear_system(cap.base, DeformationKind::A, bc, 0);
    CHECK(ls.constraint.rows() == 3);
    CHECK(ls.boundary.rows() == 32);
    CHECK(ls.interior.rows() == ls.num_unknowns());
}
