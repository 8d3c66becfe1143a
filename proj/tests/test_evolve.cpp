#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"

#include "rdeform/evolve.hpp"

#include <cmath>
#include <string>

using namespace rdeform;

namespace {

EvolutionProblem cap_problem(const test::CapFixture& cap, DeformationKind kind)
{
    EvolutionProblem pb;
    pb.base = &cap.base;
    pb.kind = kind;
    pb.boundary = test::cap_boundary(1);
    pb.fix_point = 0;
    pb.kernel_coeffs = {1.0};
    return pb;
}

} // namespace

TEST_CASE("the base surface has zero drift")
{
    test::CapFixture cap;
    const EvolutionState s = initial_state(cap.base);
    CHECK(s.t == 0.0);
    CHECK(s.field.is_zero());
    REQUIRE(s.history.size() == 1u);
    const EvolutionDiagnostics d = measure(cap.base, DeformationKind::H, s.field);
    CHECK(d.drift < 1e-14);
    CHECK(d.g_residual < 1e-14);
    CHECK(run(cap_problem(cap, DeformationKind::H), 0.0, 0.01).history.size() == 1u);
}

TEST_CASE("explicit evolution: first-order drift and small G residual")
{
    test::CapFixture cap;
    for (DeformationKind kind : {DeformationKind::H, DeformationKind::A}) {
        CAPTURE(to_string(kind));
        const EvolutionProblem pb = cap_problem(cap, kind);
        int observed = 0;
        const EvolutionState coarse = run(pb, 0.05, 0.01, [&](const EvolutionState&) { ++observed; });
        CHECK(observed == 6);
        CHECK(coarse.t == doctest::Approx(0.05));
        REQUIRE(coarse.history.size() == 6u);
        for (const auto& d : coarse.history) {
            CHECK(d.g_residual < 1e-3 * 0.01 * 0.01);
            if (d.t > 0.0) CHECK(d.kernel_dim == 1);
        }
        const EvolutionState fine = run(pb, 0.05, 0.005);
        const double ratio = coarse.history.back().drift / fine.history.back().drift;
        CAPTURE(coarse.history.back().drift);
        CHECK(coarse.history.back().drift < 5e-3);
        CHECK(ratio > 1.7);
        CHECK(ratio < 2.3);
    }
}

TEST_CASE("the last step is shortened to land on t0")
{
    test::CapFixture cap;
    const EvolutionState s = run(cap_problem(cap, DeformationKind::H), 0.025, 0.01);
    CHECK(s.history.size() == 4u);
    CHECK(s.t == doctest::Approx(0.025));
}

TEST_CASE("boundary data above the smallness budget stops the run")
{
    test::CapFixture cap;
    EvolutionProblem pb = cap_problem(cap, DeformationKind::H);
    pb.boundary.gamma_rate.cos_coef = {0.5};
    pb.smallness_budget = 0.1;
    try {
        run(pb, 0.05, 0.01);
        FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
    // default budget: 0.1 · min H · mean|λ̃|
    const BoundaryCondition bc = boundary_coefficients(cap.im, cap.metric, pb.boundary);
    CHECK(default_smallness_budget(cap.base, bc) > 0.0);
}

TEST_CASE("steering coefficients must match the kernel dimension")
{
    test::CapFixture cap;
    EvolutionProblem pb = cap_problem(cap, DeformationKind::H);
    pb.kernel_coeffs = {1.0, 2.0};
    CHECK_THROWS_AS(step(pb, initial_state(cap.base), 0.01), ConfigError);
    CHECK_THROWS_AS(step(pb, initial_state(cap.base), 0.0), ConfigError);
}

TEST_CASE("two-chart sphere: seam pairing and translation kernel")
{
    // the translation modes separate from the discretization spectrum from 12x48 on
    auto grid = std::make_shared<PolarGrid>(GridSpec{12, 48});
    const MetricField m = MetricField::euclidean();
    const ClosedSurface cs = two_chart_sphere(1.0, grid, m);
    CHECK(cs.seam_mismatch() < 1e-12);
    CHECK(cs.seam_plus.size() == 48u);
    const RHSystem sys = glue_closed_system(cs, DeformationKind::H, m, std::nullopt);
    CHECK(sys.charts == 2);
    const RHSolution sol = solve(sys);
    CHECK(sol.kernel_dim == 3);
    const auto tf = closed_translation_fields(cs, m);
    CHECK(subspace_angle({tf[0], tf[1], tf[2]}, sol.kernel) < 1e-3);
    for (const auto& t : tf) CHECK(null_residual(sys, t, sol.sigma_max) < 1e-5);
}

TEST_CASE("charts that do not close up are rejected")
{
    auto grid = std::make_shared<PolarGrid>(GridSpec{8, 32});
    const MetricField m = MetricField::euclidean();
    Immersion plus = build_immersion(Chart::stereographic_sphere(1.0, Hemisphere::South), grid);
    Immersion minus = build_immersion(Chart::stereographic_sphere(1.5, Hemisphere::North), grid);
    CHECK_THROWS_AS(make_closed_surface(std::move(plus), std::move(minus), m), NumericalError);
}
