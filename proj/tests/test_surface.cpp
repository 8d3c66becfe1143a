#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"

#include "rdeform/surface.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rdeform;
using std::numbers::pi;

TEST_CASE("grid specification is validated")
{
    CHECK_THROWS_AS(PolarGrid(GridSpec{4, 32}), ConfigError);
    CHECK_THROWS_AS(PolarGrid(GridSpec{8, 33}), ConfigError);
    CHECK_THROWS_AS(PolarGrid(GridSpec{8, 8}), ConfigError);
    CHECK_NOTHROW(PolarGrid(GridSpec{8, 16}));
}

TEST_CASE("finite-difference weights are exact on polynomials")
{
    const std::vector<double> xs{-0.3, -0.1, 0.0, 0.2, 0.5};
    const auto w = fd_weights(0.05, xs, 2);
    auto f = [](double x) { return 1.0 - 2.0 * x + 3.0 * x * x - x * x * x; };
    double d0 = 0, d1 = 0, d2 = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        d0 += w[0][k] * f(xs[k]);
        d1 += w[1][k] * f(xs[k]);
        d2 += w[2][k] * f(xs[k]);
    }
    const double x = 0.05;
    CHECK(d0 == doctest::Approx(f(x)).epsilon(1e-12));
    CHECK(d1 == doctest::Approx(-2.0 + 6.0 * x - 3.0 * x * x).epsilon(1e-12));
    CHECK(d2 == doctest::Approx(6.0 - 6.0 * x).epsilon(1e-12));
}

TEST_CASE("grid operators differentiate smooth fields")
{
    // Exact along diameters; the periodic angular stencils converge at high
    // order, so the error must drop sharply under refinement.
    auto error = [](GridSpec spec) {
        const PolarGrid grid(spec);
        std::vector<double> f(grid.num_nodes());
        for (int p = 0; p < grid.num_nodes(); ++p)
            f[p] = std::pow(grid.x1(p), 3) * grid.x2(p) + grid.x2(p) * grid.x2(p);
        const auto f1 = apply_op(grid.d1(), f), f2 = apply_op(grid.d2(), f), f12 = apply_op(grid.d12(), f),
                   f22 = apply_op(grid.d22(), f);
        double err = 0.0;
        for (int p = 0; p < grid.num_nodes(); ++p) {
            const double x = grid.x1(p), y = grid.x2(p);
            err = std::max({err, std::abs(f1[p] - 3 * x * x * y), std::abs(f2[p] - (x * x * x + 2 * y)),
                            std::abs(f12[p] - 3 * x * x), std::abs(f22[p] - 2.0)});
        }
        return err;
    };
    const double coarse = error({16, 64}), fine = error({32, 128});
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(coarse < 1e-5);
    CHECK(fine < coarse / 64.0);

    const PolarGrid grid(GridSpec{16, 64});
    double area = 0.0;
    for (double w : grid.area_weights()) area += w;
    CHECK(area == doctest::Approx(pi).epsilon(1e-10));
    CHECK(grid.boundary_nodes().size() == 64u);
}

TEST_CASE("spherical cap: umbilic forms, conjugate-isothermal, exact area")
{
    for (double radius : {0.5, 1.0, 2.0}) {
        test::CapFixture cap({16, 64}, radius);
        for (const auto& pf : cap.forms.points) {
            CHECK(pf.H == doctest::Approx(1.0 / radius).epsilon(1e-10));
            CHECK(pf.K == doctest::Approx(1.0 / (radius * radius)).epsilon(1e-10));
            CHECK(pf.k1 == doctest::Approx(pf.k2).epsilon(1e-6)); // square root of a roundoff-level discriminant
        }
        CHECK(verify_conjugate_isothermal(cap.forms, 1e-8).pass);
        const double exact = 2.0 * pi * radius * radius * (1.0 - std::cos(pi / 4));
        CHECK(area_element(cap.forms, *cap.grid).total == doctest::Approx(exact).epsilon(1e-4));
    }
}

TEST_CASE("normal jets of a sphere are the scaled position jets")
{
    test::CapFixture cap({8, 32}, 1.5);
    for (int p = 0; p < cap.im.num_nodes(); ++p) {
        const auto& pf = cap.forms.points[p];
        const auto& jet = cap.im.jets[p];
        // n = ±(y - center)/R, so dn = ±dy/R with the same sign everywhere.
        const double s = pf.dn[0].dot(jet.dy[0]) > 0.0 ? 1.0 : -1.0;
        for (int i = 0; i < 2; ++i) CHECK((pf.dn[i] - s * jet.dy[i] / 1.5).norm() < 1e-10);
        for (int k = 0; k < 3; ++k) CHECK((pf.d2n[k] - s * jet.d2y[k] / 1.5).norm() < 1e-10);
    }
}

TEST_CASE("sphere about the origin in a conformal ambient metric")
{
    // Conformal factor 1/f with f = 1 + κ r²/4: principal curvature f/r − κ r/2.
    const double kappa = 1.0, r = 0.5;
    test::CapFixture cap({8, 32}, r, pi / 4, MetricField::constant_curvature(kappa));
    const double f = 1.0 + kappa * r * r / 4.0;
    for (const auto& pf : cap.forms.points) CHECK(pf.H == doctest::Approx(f / r - kappa * r / 2.0).epsilon(1e-10));
}

TEST_CASE("paraboloid and saddle through custom charts")
{
    auto grid = std::make_shared<PolarGrid>(GridSpec{8, 32});
    const MetricField m = MetricField::euclidean();
    // y = (x1, x2, (x1² + x2²)/2): curvature 1 at the vertex.
    const Chart bowl = Chart::custom({{{{1, 0, 1.0}}, {{0, 1, 1.0}}, {{2, 0, 0.5}, {0, 2, 0.5}}}});
    const auto f = fundamental_forms(build_immersion(bowl, grid), m);
    CHECK(f.admitted);
    CHECK(f.points[0].H == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.points[0].K == doctest::Approx(1.0).epsilon(1e-12));
    // A saddle is not admitted.
    const Chart saddle = Chart::custom({{{{1, 0, 1.0}}, {{0, 1, 1.0}}, {{2, 0, 0.5}, {0, 2, -0.5}}}});
    const Immersion sim = build_immersion(saddle, grid);
    CHECK_THROWS_AS(fundamental_forms(sim, m), AdmittanceError);
    CHECK_FALSE(fundamental_forms(sim, m, false).admitted);
}

TEST_CASE("chart parameters are validated")
{
    CHECK_THROWS_AS(Chart::spherical_cap(1.0, pi / 2), ConfigError);
    CHECK_THROWS_AS(Chart::spherical_cap(-1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(Chart::stereographic_sphere(0.0), ConfigError);
}

TEST_CASE("principal curvatures of diagonal forms")
{
    Mat2 g = Mat2::Identity(), b;
    b << 3.0, 0.0, 0.0, 2.0;
    const Curvatures c = principal_curvatures(g, b);
    CHECK(std::min(c.k1, c.k2) == doctest::Approx(2.0));
    CHECK(std::max(c.k1, c.k2) == doctest::Approx(3.0));
    CHECK(c.H == doctest::Approx(2.5));
    CHECK(c.K == doctest::Approx(6.0));
}

TEST_CASE("frame components invert the ambient field (property)")
{
    test::CapFixture cap({8, 32});
    std::mt19937 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const DeformationField f = test::random_field(*cap.grid, rng, 0.3);
        const DeformationField g = frame_components(cap.im, cap.forms, ambient_field(cap.im, cap.forms, f));
        for (int p = 0; p < cap.grid->num_nodes(); ++p) {
            CHECK(g.a1[p] == doctest::Approx(f.a1[p]).epsilon(1e-10));
            CHECK(g.a2[p] == doctest::Approx(f.a2[p]).epsilon(1e-10));
            CHECK(g.c[p] == doctest::Approx(f.c[p]).epsilon(1e-10));
        }
    }
}

TEST_CASE("serial and parallel fundamental forms agree exactly")
{
    test::CapFixture cap({16, 64}, 1.0, pi / 4, MetricField::constant_curvature(0.5));
    const auto serial = fundamental_forms_serial(cap.im, cap.metric);
    REQUIRE(serial.points.size() == cap.forms.points.size());
    for (std::size_t p = 0; p < serial.points.size(); ++p) {
        const auto &a = serial.points[p], &b = cap.forms.points[p];
        CHECK(a.H == b.H);
        CHECK(a.K == b.K);
        CHECK((a.g - b.g).norm() == 0.0);
        CHECK((a.b - b.b).norm() == 0.0);
        CHECK((a.dn[0] - b.dn[0]).norm() == 0.0);
    }
}
