#include "rdeform/polar_grid.hpp"

#include "rdeform/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rdeform {

void GridSpec::validate() const
{
    if (n_r < 8) throw ConfigError("grid: N_r must be >= 8 (got " + std::to_string(n_r) + ")");
    if (n_theta < 16 || n_theta % 2 != 0)
        throw ConfigError("grid: N_theta must be even and >= 16 (got " + std::to_string(n_theta) + ")");
}

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& xs, int max_deriv)
{
    // Fornberg, "Generation of finite difference formulas on arbitrarily
    // spaced grids", Math. Comp. 51 (1988).
    const int n = static_cast<int>(xs.size());
    const int m = max_deriv;
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

PolarGrid::PolarGrid(GridSpec spec) : spec_(spec)
{
    spec_.validate();
    build();
}

double PolarGrid::dtheta() const { return 2.0 * std::numbers::pi / spec_.n_theta; }

int PolarGrid::node(int ring, int j) const
{
    const int nt = spec_.n_theta;
    j %= nt;
    if (j < 0) j += nt;
    return 1 + (ring - 1) * nt + j;
}

std::vector<int> PolarGrid::boundary_nodes() const
{
    std::vector<int> b(spec_.n_theta);
    for (int j = 0; j < spec_.n_theta; ++j) b[j] = node(spec_.n_r, j);
    return b;
}

const SparseMatrix& PolarGrid::jet_op(int k) const
{
    switch (k) {
    case 0: return id_;
    case 1: return d1_;
    case 2: return d2_;
    case 3: return d11_;
    case 4: return d12_;
    default: return d22_;
    }
}

void PolarGrid::build()
{
    using Triplet = Eigen::Triplet<double>;
    const int nr = spec_.n_r;
    const int nt = spec_.n_theta;
    const int half = nt / 2;
    const int nn = num_nodes();
    const double hr = h();
    const double dth = dtheta();

    r_.assign(nn, 0.0);
    theta_.assign(nn, 0.0);
    x_.assign(nn, {0.0, 0.0});
    for (int i = 1; i <= nr; ++i)
        for (int j = 0; j < nt; ++j) {
            const int p = node(i, j);
            r_[p] = i * hr;
            theta_[p] = j * dth;
            x_[p] = {r_[p] * std::cos(theta_[p]), r_[p] * std::sin(theta_[p])};
        }

    // Node at signed diameter position s (in units of h) along ray j.
    auto diameter_node = [&](int s, int j) {
        if (s > 0) return node(s, j);
        if (s < 0) return node(-s, j + half);
        return 0;
    };
    auto radial_window = [&](int s) {
        const int w = kRadialStencil;
        const int start = std::clamp(s - w / 2, -nr, nr - (w - 1));
        std::vector<int> pos(w);
        for (int k = 0; k < w; ++k) pos[k] = start + k;
        return pos;
    };

    std::vector<Triplet> tr, trr, tth, tthth;
    for (int i = 1; i <= nr; ++i) {
        const auto pos = radial_window(i);
        std::vector<double> xs(pos.begin(), pos.end());
        const auto w = fd_weights(static_cast<double>(i), xs, 2);
        for (int j = 0; j < nt; ++j) {
            const int p = node(i, j);
            for (std::size_t k = 0; k < pos.size(); ++k) {
                const int q = diameter_node(pos[k], j);
                tr.emplace_back(p, q, w[1][k] / hr);
                trr.emplace_back(p, q, w[2][k] / (hr * hr));
            }
        }
    }
    {
        std::vector<double> xs;
        for (int k = -kAngularStencil / 2; k <= kAngularStencil / 2; ++k) xs.push_back(k);
        const auto w = fd_weights(0.0, xs, 2);
        for (int i = 1; i <= nr; ++i)
            for (int j = 0; j < nt; ++j) {
                const int p = node(i, j);
                for (std::size_t k = 0; k < xs.size(); ++k) {
                    const int q = node(i, j + static_cast<int>(xs[k]));
                    if (w[1][k] != 0.0) tth.emplace_back(p, q, w[1][k] / dth);
                    tthth.emplace_back(p, q, w[2][k] / (dth * dth));
                }
            }
    }
    SparseMatrix Dr(nn, nn), Drr(nn, nn), Dth(nn, nn), Dthth(nn, nn);
    Dr.setFromTriplets(tr.begin(), tr.end());
    Drr.setFromTriplets(trr.begin(), trr.end());
    Dth.setFromTriplets(tth.begin(), tth.end());
    Dthth.setFromTriplets(tthth.begin(), tthth.end());
    SparseMatrix Drth = (Dr * Dth).pruned();
    dth_ = Dth;

    std::vector<Triplet> t1, t2, t11, t12, t22;
    auto add_row = [](std::vector<Triplet>& out, const SparseMatrix& m, int row, double scale) {
        if (scale == 0.0) return;
        for (SparseMatrix::InnerIterator it(m, row); it; ++it) out.emplace_back(row, it.col(), scale * it.value());
    };
    for (int p = 1; p < nn; ++p) {
        const double c = std::cos(theta_[p]), s = std::sin(theta_[p]), rr = r_[p];
        add_row(t1, Dr, p, c);
        add_row(t1, Dth, p, -s / rr);
        add_row(t2, Dr, p, s);
        add_row(t2, Dth, p, c / rr);

        add_row(t11, Drr, p, c * c);
        add_row(t11, Drth, p, -2 * s * c / rr);
        add_row(t11, Dthth, p, s * s / (rr * rr));
        add_row(t11, Dr, p, s * s / rr);
        add_row(t11, Dth, p, 2 * s * c / (rr * rr));

        add_row(t22, Drr, p, s * s);
        add_row(t22, Drth, p, 2 * s * c / rr);
        add_row(t22, Dthth, p, c * c / (rr * rr));
        add_row(t22, Dr, p, c * c / rr);
        add_row(t22, Dth, p, -2 * s * c / (rr * rr));

        add_row(t12, Drr, p, s * c);
        add_row(t12, Drth, p, (c * c - s * s) / rr);
        add_row(t12, Dthth, p, -s * c / (rr * rr));
        add_row(t12, Dr, p, -s * c / rr);
        add_row(t12, Dth, p, -(c * c - s * s) / (rr * rr));
    }

    // Center: least-squares fit of directional derivatives over the Nθ/2
    // diameters.
    {
        const auto pos = radial_window(0);
        std::vector<double> xs(pos.begin(), pos.end());
        const auto w = fd_weights(0.0, xs, 2);
        const double M = half;
        for (int j = 0; j < half; ++j) {
            const double th = j * dth;
            const double c = std::cos(th), s = std::sin(th);
            const double c2 = std::cos(2 * th), s2 = std::sin(2 * th);
            for (std::size_t k = 0; k < pos.size(); ++k) {
                const int q = diameter_node(pos[k], j);
                const double d1w = w[1][k] / hr;
                const double d2w = w[2][k] / (hr * hr);
                t1.emplace_back(0, q, 2.0 / M * c * d1w);
                t2.emplace_back(0, q, 2.0 / M * s * d1w);
                const double mean = d2w / M;
                const double cc = 2.0 / M * c2 * d2w;
                t11.emplace_back(0, q, mean + cc);
                t22.emplace_back(0, q, mean - cc);
                t12.emplace_back(0, q, 2.0 / M * s2 * d2w);
            }
        }
    }
    auto make = [&](std::vector<Triplet>& t) {
        SparseMatrix m(nn, nn);
        m.setFromTriplets(t.begin(), t.end());
        m.prune(0.0);
        return m;
    };
    d1_ = make(t1);
    d2_ = make(t2);
    d11_ = make(t11);
    d12_ = make(t12);
    d22_ = make(t22);
    id_.resize(nn, nn);
    id_.setIdentity();

    // radial quadrature weights for ∫_0^1 F(r) dr on r_i = i h
    std::vector<double> wr(nr + 1, 0.0);
    auto simpson = [&](int a, int b) {
        for (int i = a; i < b; i += 2) {
            wr[i] += hr / 3.0;
            wr[i + 1] += 4.0 * hr / 3.0;
            wr[i + 2] += hr / 3.0;
        }
    };
    if (nr % 2 == 0) {
        simpson(0, nr);
    } else {
        simpson(0, nr - 3);
        const double e = 3.0 * hr / 8.0;
        wr[nr - 3] += e;
        wr[nr - 2] += 3 * e;
        wr[nr - 1] += 3 * e;
        wr[nr] += e;
    }
    area_w_.assign(nn, 0.0);
    for (int i = 1; i <= nr; ++i)
        for (int j = 0; j < nt; ++j) area_w_[node(i, j)] = wr[i] * i * hr * dth;
}

std::vector<double> apply_op(const SparseMatrix& op, const std::vector<double>& f)
{
    Eigen::Map<const Eigen::VectorXd> x(f.data(), static_cast<Eigen::Index>(f.size()));
    Eigen::VectorXd y = op * x;
    return {y.data(), y.data() + y.size()};
}

} // namespace rdeform
