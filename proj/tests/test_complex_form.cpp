#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"

#include "rdeform/complex_form.hpp"

#include <cmath>

using namespace rdeform;

TEST_CASE("cap systems reduce to the complex form")
{
    test::CapFixture cap({8, 32});
    const BoundaryCondition bc = boundary_coefficients(cap.im, cap.metric, test::cap_boundary(1));
    for (DeformationKind k : {DeformationKind::Ch, DeformationKind::H, DeformationKind::A, DeformationKind::K}) {
        CAPTURE(to_string(k));
        const ComplexFormReport rep = to_complex_form(assemble_linear_system(cap.base, k, bc, std::nullopt));
        REQUIRE(rep.available);
        CHECK(rep.reason.empty());
        CHECK(rep.max_fit_residual < 1e-8);
        CHECK(rep.min_pivot > 1e-3);
        REQUIRE(rep.A.size() == static_cast<std::size_t>(cap.grid->num_nodes()));
        // boundary data carried through unchanged
        REQUIRE(rep.lambda.size() == bc.lambda.size());
        for (std::size_t j = 0; j < bc.lambda.size(); ++j) CHECK(std::abs(rep.lambda[j] - bc.lambda[j]) < 1e-15);
    }
}

TEST_CASE("coefficient moduli of a rotationally symmetric cap depend on r only")
{
    test::CapFixture cap({8, 32});
    const ComplexFormReport rep =
        to_complex_form(assemble_linear_system(cap.base, DeformationKind::H, std::nullopt, std::nullopt));
    REQUIRE(rep.available);
    const PolarGrid& g = *cap.grid;
    for (int ring = 1; ring <= g.spec().n_r; ++ring) {
        const int p0 = g.node(ring, 0);
        for (int j = 1; j < g.spec().n_theta; ++j) {
            const int p = g.node(ring, j);
            CHECK(std::abs(rep.A[p]) == doctest::Approx(std::abs(rep.A[p0])).epsilon(1e-6));
            CHECK(std::abs(rep.B[p]) == doctest::Approx(std::abs(rep.B[p0])).epsilon(1e-6));
            CHECK(std::abs(rep.E[p]) == doctest::Approx(std::abs(rep.E[p0])).epsilon(1e-6));
            CHECK(rep.q0[p] == doctest::Approx(rep.q0[p0]).epsilon(1e-6));
        }
    }
}

TEST_CASE("elimination is refused below the pivot threshold")
{
    test::CapFixture cap({8, 32});
    ComplexFormOptions opts;
    opts.pivot_threshold = 1e3;
    const ComplexFormReport rep =
        to_complex_form(assemble_linear_system(cap.base, DeformationKind::H, std::nullopt, std::nullopt), opts);
    CHECK_FALSE(rep.available);
    CHECK_FALSE(rep.reason.empty());
}
