#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rdeform/ambient.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace rdeform;

TEST_CASE("euclidean metric is the identity with vanishing connection")
{
    const MetricField m = MetricField::euclidean();
    const Vec3 y(0.3, -1.2, 2.0);
    CHECK((m.metric_at(y) - Mat3::Identity()).norm() == 0.0);
    for (const Mat3& g : m.christoffel_at(y)) CHECK(g.norm() == 0.0);
    CHECK(ambient_dot(m, y, Vec3(1, 2, 3), Vec3(4, 5, 6)) == doctest::Approx(32.0));
}

TEST_CASE("constant-curvature metric matches its closed form")
{
    const double kappa = 1.0;
    const MetricField m = MetricField::constant_curvature(kappa);
    const Vec3 y(0.5, 0.25, -1.0);
    const double f = 1.0 + kappa * y.squaredNorm() / 4.0;
    CHECK((m.metric_at(y) - Mat3::Identity() / (f * f)).norm() < 1e-15);
}

TEST_CASE("Christoffel symbols agree with finite differences of the metric")
{
    MetricCoeffTable coeffs;
    coeffs[0] = {{0, 0, 0, 1.0}, {1, 0, 0, 0.02}, {0, 2, 0, 0.005}};
    coeffs[1] = {{0, 0, 1, 0.01}};
    coeffs[3] = {{0, 0, 0, 1.0}, {1, 1, 0, 0.003}};
    coeffs[5] = {{0, 0, 0, 1.5}, {0, 0, 2, 0.002}};
    const MetricField m = MetricField::custom(coeffs);
    const Vec3 y(0.4, -0.3, 0.6);
    const double h = 1e-5;
    std::array<Mat3, 3> da;
    for (int g = 0; g < 3; ++g) {
        Vec3 e = Vec3::Zero();
        e(g) = h;
        da[g] = (m.metric_at(y + e) - m.metric_at(y - e)) / (2 * h);
    }
    const Mat3 inv = m.metric_at(y).inverse();
    const Christoffel G = m.christoffel_at(y);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                double expected = 0.0;
                for (int d = 0; d < 3; ++d)
                    expected += 0.5 * inv(a, d) * (da[b](d, c) + da[c](d, b) - da[d](b, c));
                CHECK(G[a](b, c) == doctest::Approx(expected).epsilon(1e-8));
            }
}

TEST_CASE("metric derivatives agree with finite differences")
{
    const MetricField m = MetricField::constant_curvature(0.7);
    const Vec3 y(-0.2, 0.9, 0.4);
    const MetricDerivatives md = m.metric_derivatives_at(y);
    const double h = 1e-5;
    for (int g = 0; g < 3; ++g) {
        Vec3 e = Vec3::Zero();
        e(g) = h;
        const Mat3 fd = (m.metric_at(y + e) - m.metric_at(y - e)) / (2 * h);
        CHECK((md.first[g] - fd).norm() < 1e-9);
        const MetricDerivatives mp = m.metric_derivatives_at(y + e), mm = m.metric_derivatives_at(y - e);
        for (int d = 0; d < 3; ++d) CHECK((md.second[g][d] - (mp.first[d] - mm.first[d]) / (2 * h)).norm() < 1e-8);
    }
}

TEST_CASE("invalid metrics are rejected")
{
    MetricCoeffTable neg;
    neg[0] = {{0, 0, 0, -1.0}};
    CHECK_THROWS_AS(MetricField::custom(neg), ConfigError);
    MetricCoeffTable high;
    high[0] = {{5, 0, 0, 1.0}};
    CHECK_THROWS_AS(MetricField::custom(high), ConfigError);
    CHECK_THROWS_AS(MetricField::constant_curvature(-0.1), ConfigError);
    CHECK_THROWS_AS(MetricField::euclidean().metric_at(Vec3(9, 0, 0)), NumericalError);
}

TEST_CASE("metric bound report")
{
    CHECK(MetricField::euclidean().verify_bounds().pass);
    const auto rep = MetricField::constant_curvature(1.0, 0.5).verify_bounds(9);
    CHECK(rep.max_value > 0.0);
}

TEST_CASE("parallel transport preserves the metric norm (property)")
{
    const MetricField m = MetricField::constant_curvature(1.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec3> path;
        for (int k = 0; k < 5; ++k) path.emplace_back(u(rng), u(rng), u(rng));
        const Vec3 v0(u(rng), u(rng), u(rng));
        const Vec3 v1 = parallel_transport(m, path, v0);
        const double n0 = ambient_dot(m, path.front(), v0, v0), n1 = ambient_dot(m, path.back(), v1, v1);
        CHECK(std::abs(n1 - n0) <= 1e-8 * n0);
    }
}

TEST_CASE("parallel transport in flat space is the identity")
{
    const MetricField m = MetricField::euclidean();
    const std::vector<Vec3> path{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 1)};
    const Vec3 v0(0.3, -0.7, 1.1);
    CHECK((parallel_transport(m, path, v0) - v0).norm() < 1e-14);
    CHECK_THROWS_AS(parallel_transport(m, std::vector<Vec3>{}, v0), NumericalError);
}
