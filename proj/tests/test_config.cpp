#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rdeform/config.hpp"

#include <string>

using namespace rdeform;

namespace {

const std::string kValid = R"({
  "metric": {"kind": "constant_curvature", "kappa": 0.5},
  "chart": {"kind": "spherical_cap", "radius": 1.0, "extent": 0.7},
  "grid": {"n_r": 12, "n_theta": 48},
  "kind": "A",
  "boundary": {
    "l_fourier": {"l1": {"cos": [0, 1], "sin": []}, "l2": {"cos": [], "sin": [0, -1]}},
    "gamma_rate_fourier": {"cos": [0.1], "sin": [0, 0.2]}
  },
  "t0": 0.2, "dt": 0.02,
  "kernel_coeffs": [1.0],
  "fix_point": "center",
  "tau_kernel": 1e-6
})";

std::string replace(std::string s, const std::string& from, const std::string& to)
{
    s.replace(s.find(from), from.size(), to);
    return s;
}

void check_error(const std::string& text, const std::string& fragment)
{
    CAPTURE(text);
    try {
        parse_config(text);
        FAIL("no ConfigError thrown");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
}

} // namespace

TEST_CASE("a complete configuration is parsed")
{
    const RunConfig cfg = parse_config(kValid);
    CHECK(cfg.text == kValid);
    CHECK(cfg.metric.kind() == MetricKind::ConstantCurvature);
    CHECK(cfg.metric.kappa() == 0.5);
    CHECK(cfg.chart.kind == ChartKind::SphericalCap);
    CHECK(cfg.chart.cap_extent == 0.7);
    CHECK(cfg.grid.n_r == 12);
    CHECK(cfg.grid.n_theta == 48);
    CHECK(cfg.kind == DeformationKind::A);
    CHECK(cfg.boundary.l1.cos_coef == std::vector<double>{0, 1});
    CHECK(cfg.boundary.l2.sin_coef == std::vector<double>{0, -1});
    CHECK(cfg.boundary.gamma_rate.sin_coef == std::vector<double>{0, 0.2});
    CHECK(cfg.t0 == 0.2);
    CHECK(cfg.dt == 0.02);
    CHECK(cfg.kernel_coeffs == std::vector<double>{1.0});
    REQUIRE(cfg.fix_point.has_value());
    CHECK(*cfg.fix_point == 0);
    CHECK(cfg.tau_kernel == 1e-6);
    CHECK_FALSE(cfg.smallness_budget.has_value());
}

TEST_CASE("defaults apply to omitted keys")
{
    const RunConfig cfg = parse_config("{}");
    CHECK(cfg.metric.is_flat());
    CHECK(cfg.kind == DeformationKind::H);
    CHECK(cfg.tau_kernel == 1e-7);
    CHECK_FALSE(cfg.fix_point.has_value());
}

TEST_CASE("invalid configurations are rejected with the offending key")
{
    check_error("{\"stepsize\": 1}", "unknown key \"stepsize\"");
    check_error(replace(kValid, "\"kappa\": 0.5", "\"kappa\": 0.5, \"extra\": 1"), "unknown key \"extra\"");
    check_error(replace(kValid, "\"A\"", "\"Z\""), "kind");
    check_error(replace(kValid, "\"dt\": 0.02", "\"dt\": -1"), "dt");
    check_error(replace(kValid, "\"tau_kernel\": 1e-6", "\"tau_kernel\": 2"), "tau_kernel");
    check_error(replace(kValid, "\"center\"", "100000"), "fix_point");
    check_error(replace(kValid, "\"center\"", "\"edge\""), "fix_point");
    check_error(replace(kValid, "\"n_theta\": 48", "\"n_theta\": 47"), "");
    check_error(replace(kValid, "\"extent\": 0.7", "\"extent\": 2.0"), "extent");
    check_error("{\"metric\": {\"kind\": \"custom\", \"coeffs\": {\"11\": [[0, 0, 0, -1]]}}}", "positive definite");
    check_error("{\"metric\": {\"kind\": \"custom\", \"coeffs\": {\"11\": [[5, 0, 0, 1]]}}}", "degree");
    check_error("{not json", "malformed JSON");
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("grid strings")
{
    const GridSpec g = parse_grid("32x128");
    CHECK(g.n_r == 32);
    CHECK(g.n_theta == 128);
    CHECK_THROWS_AS(parse_grid("32*128"), ConfigError);
    CHECK_THROWS_AS(parse_grid("4x16"), ConfigError);
}
