#pragma once

// JSON run configuration. Every object is validated against a closed key set
// (unknown keys are rejected) before any computation starts.
//
// {
//   "metric":   {"kind": "euclidean"}
//             | {"kind": "constant_curvature", "kappa": 1.0}
//             | {"kind": "custom", "coeffs": {"11": [[p, q, r, c], ...], ...}},
//               (all metric kinds accept an optional "bound", the M0 cap)
//   "chart":    {"kind": "spherical_cap", "radius": 1, "extent": 0.785398}
//             | {"kind": "stereographic_sphere", "radius": 1, "hemisphere": "south"}
//             | {"kind": "custom", "poly": [[[p, q, c], ...], [...], [...]]},
//   "grid":     {"n_r": 32, "n_theta": 128},
//   "kind":     "Ch" | "H" | "A" | "K",
//   "boundary": {"l_fourier": {"l1": {"cos": [...], "sin": [...]}, "l2": {...}},
//                "gamma_rate_fourier": {"cos": [...], "sin": [...]},
//                "gamma_rate_slope": {"cos": [...], "sin": [...]}},   (optional)
//   "t0": 0.1, "dt": 0.01,
//   "kernel_coeffs": [1.0],
//   "fix_point": null | node index | "center",
//   "tau_kernel": 1e-7,
//   "smallness_budget": 0.05                                         (optional)
// }

#include "rdeform/linearize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rdeform {

struct RunConfig {
    std::string text; // the accepted document, byte for byte
    MetricField metric = MetricField::euclidean();
    Chart chart = Chart::spherical_cap(1.0, 0.7853981633974483);
    GridSpec grid{16, 64};
    DeformationKind kind = DeformationKind::H;
    BoundaryData boundary;
    FourierSeries gamma_rate_slope;
    double t0 = 0.0;
    double dt = 0.01;
    std::vector<double> kernel_coeffs;
    std::optional<int> fix_point;
    double tau_kernel = 1e-7;
    std::optional<double> smallness_budget;
};

// Throws ConfigError with a message naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// "NRxNT" (e.g. "32x128"); throws ConfigError.
GridSpec parse_grid(const std::string& text);

} // namespace rdeform
