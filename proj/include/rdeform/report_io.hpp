#pragma once

// Output formats: CSV for grids and time series, JSON for scalar reports.
// Every file is written to a temporary sibling and renamed into place, so a
// reader never sees a partial file. Numbers use the shortest round-trip
// representation, which makes reruns byte-identical.

#include "rdeform/complex_form.hpp"
#include "rdeform/evolve.hpp"

#include <string>
#include <vector>

namespace rdeform {

// Shortest decimal text that reads back to exactly `x`.
std::string format_number(double x);

void write_file_atomic(const std::string& path, const std::string& content);

// One row per node: node, r, theta, y1, y2, y3, H, K, k1, k2, sqrt_g.
std::string forms_csv(const Immersion& im, const FundamentalForms& forms);

// One row per node: node, r, theta, a1, a2, c, y1, y2, y3 of the deformed
// immersion y + z.
std::string final_state_csv(const Immersion& base, const FundamentalForms& base_forms, const DeformationField& field);

// One row per recorded state.
std::string trajectory_csv(const std::vector<EvolutionDiagnostics>& history, DeformationKind kind);

// One row per node: node, r, theta, p1, p2, q1, q2, q0, A, B, E, Psi (real
// and imaginary parts), fit_residual.
std::string coefficients_csv(const PolarGrid& grid, const ComplexFormReport& rep);

// One row per computed singular value: index, sigma_rel.
std::string spectrum_csv(const std::vector<double>& spectrum);

// One row per node: node, r, theta, then a1, a2, c of every kernel field
// (per chart for multi-chart systems: chart column added).
std::string kernel_csv(const PolarGrid& grid, const std::vector<std::vector<double>>& kernel, int charts = 1);

} // namespace rdeform
