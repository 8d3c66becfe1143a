#pragma once

// Shared fixtures for the unit tests: a spherical cap on a small grid and
// smooth random polynomial fields.

#include "rdeform/linearize.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

namespace rdeform::test {

struct CapFixture {
    std::shared_ptr<const PolarGrid> grid;
    MetricField metric;
    Immersion im;
    FundamentalForms forms;
    BaseSurface base;

    explicit CapFixture(GridSpec spec = {8, 32}, double radius = 1.0, double extent = std::numbers::pi / 4,
                        MetricField m = MetricField::euclidean())
        : grid(std::make_shared<PolarGrid>(spec)),
          metric(std::move(m)),
          im(build_immersion(Chart::spherical_cap(radius, extent), grid)),
          forms(fundamental_forms(im, metric)),
          base{&im, &forms, &metric}
    {
    }
    CapFixture(const CapFixture&) = delete;
};

// Cubic polynomial field with normally distributed coefficients.
inline DeformationField random_field(const PolarGrid& grid, std::mt19937& rng, double amplitude)
{
    std::normal_distribution<double> nd;
    DeformationField f = DeformationField::zeros(grid.num_nodes());
    for (auto* comp : {&f.a1, &f.a2, &f.c})
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; i + j <= 3; ++j) {
                const double coef = amplitude * nd(rng);
                for (int p = 0; p < grid.num_nodes(); ++p)
                    (*comp)[p] += coef * std::pow(grid.x1(p), i) * std::pow(grid.x2(p), j);
            }
    return f;
}

// Boundary tangent fields whose boundary problem has index n ∈ {1, 0, -1}.
inline BoundaryData cap_boundary(int n)
{
    BoundaryData bd;
    if (n == 1) {
        bd.l1.cos_coef = {0, 1};
        bd.l2.sin_coef = {0, -1};
    } else if (n == 0) {
        bd.l1.cos_coef = {1};
    } else {
        bd.l1.cos_coef = {0, 1};
        bd.l2.sin_coef = {0, 1};
    }
    return bd;
}

} // namespace rdeform::test
