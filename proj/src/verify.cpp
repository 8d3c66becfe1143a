#include "rdeform/verify.hpp"

#include "rdeform/evolve.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace rdeform {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x)
{
    std::ostringstream os;
    os << std::setprecision(3) << std::scientific << x;
    return os.str();
}

std::string fixed(double x, int digits = 2)
{
    std::ostringstream os;
    os << std::setprecision(digits) << std::fixed << x;
    return os.str();
}

const std::array<DeformationKind, 3> kSolverKinds{DeformationKind::Ch, DeformationKind::H, DeformationKind::A};
const std::array<DeformationKind, 4> kAllKinds{DeformationKind::Ch, DeformationKind::H, DeformationKind::A,
                                               DeformationKind::K};

struct Cap {
    std::shared_ptr<const PolarGrid> grid;
    MetricField metric = MetricField::euclidean();
    Immersion im;
    FundamentalForms forms;
    BaseSurface base;

    explicit Cap(GridSpec spec)
        : grid(std::make_shared<PolarGrid>(spec)),
          im(build_immersion(Chart::spherical_cap(1.0, kPi / 4), grid)),
          forms(fundamental_forms(im, metric)),
          base{&im, &forms, &metric}
    {
    }
    Cap(const Cap&) = delete;
};

// Smooth random field: random combination of the monomials x1^i x2^j,
// i + j <= 3, per component, optionally vanishing at the center.
DeformationField smooth_random_field(const PolarGrid& grid, std::mt19937& rng, double amplitude, bool pin_center)
{
    std::normal_distribution<double> nd;
    DeformationField f = DeformationField::zeros(grid.num_nodes());
    for (auto* comp : {&f.a1, &f.a2, &f.c})
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; i + j <= 3; ++j) {
                const double coef = amplitude * nd(rng);
                if (pin_center && i + j == 0) continue;
                for (int p = 0; p < grid.num_nodes(); ++p)
                    (*comp)[p] += coef * std::pow(grid.x1(p), i) * std::pow(grid.x2(p), j);
            }
    return f;
}

DeformationField scaled(const DeformationField& f, double s)
{
    DeformationField out = f;
    for (auto* comp : {&out.a1, &out.a2, &out.c})
        for (double& v : *comp) v *= s;
    return out;
}

// ------------------------------------------------------------------ 1

CheckResult check_index(const VerifyOptions&)
{
    CheckResult r;
    r.id = 1;
    r.name = "index calibration";
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    const PolarGrid grid(GridSpec{8, 64});
    const PolarGrid fine(GridSpec{8, 128});
    for (int k = -2; k <= 3; ++k) {
        std::vector<Complex> lambda;
        for (int j = 0; j < 64; ++j) lambda.push_back(std::polar(1.0, k * 2 * kPi * j / 64));
        const int direct = compute_index(lambda);
        // λ̃ with λ = (λ̃1 − iλ̃2)/|λ̃| winding k, at N_θ and 2N_θ
        auto synthetic = [k](const PolarGrid& g) {
            std::vector<std::array<double, 2>> lt;
            for (int p : g.boundary_nodes()) lt.push_back({std::cos(k * g.theta(p)), -std::sin(k * g.theta(p))});
            return boundary_from_lambda_tilde(g, lt).index;
        };
        const int via_tilde = synthetic(grid), doubled = synthetic(fine);
        ok = ok && direct == k && via_tilde == k && doubled == k;
        d << (k == -2 ? "" : " ") << k << "->" << direct << "/" << via_tilde << "/" << doubled;
    }
    r.seconds = seconds_since(t0);
    r.pass = ok;
    r.detail = "k->n (direct/from lambda~/2N_theta):" + d.str();
    return r;
}

// ------------------------------------------------------------------ 2

// Real basis of {ω = Σ_k c_k z^k : Re(e^{−inθ} ω) = 0 on |z| = 1}, from the
// null space of the boundary condition on the coefficients (degree <= 2n+2).
std::vector<std::vector<double>> holomorphic_ansatz(const PolarGrid& grid, int n)
{
    const int deg = 2 * n + 2, m = 2 * (deg + 1), samples = 8 * (deg + 1);
    Eigen::MatrixXd C(samples, m);
    for (int s = 0; s < samples; ++s) {
        const double th = 2 * kPi * s / samples;
        for (int k = 0; k <= deg; ++k) {
            const Complex e = std::polar(1.0, (k - n) * th);
            C(s, 2 * k) = e.real();      // c_k = 1
            C(s, 2 * k + 1) = -e.imag(); // c_k = i
        }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    std::vector<std::vector<double>> basis;
    const auto& sv = svd.singularValues();
    for (int j = 0; j < m; ++j) {
        if (j < sv.size() && sv(j) > 1e-10 * sv(0)) continue;
        const Eigen::VectorXd coef = svd.matrixV().col(j);
        std::vector<double> v(2 * grid.num_nodes());
        for (int p = 0; p < grid.num_nodes(); ++p) {
            const Complex z(grid.x1(p), grid.x2(p));
            Complex w = 0.0;
            for (int k = 0; k <= deg; ++k) w += Complex(coef(2 * k), coef(2 * k + 1)) * std::pow(z, k);
            v[2 * p] = w.real();
            v[2 * p + 1] = w.imag();
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

CheckResult check_holomorphic(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 2;
    r.name = "holomorphic kernel law";
    const auto t0 = Clock::now();
    auto grid = std::make_shared<PolarGrid>(opts.holomorphic_grid);
    bool ok = true;
    std::ostringstream d;
    for (int n : {0, 1, 2}) {
        const auto tc = Clock::now();
        VekuaProblem pb;
        pb.grid = grid;
        for (int p : grid->boundary_nodes()) pb.lambda.push_back(std::polar(1.0, n * grid->theta(p)));
        const RHSystem sys = vekua_system(pb);
        SolveOptions so;
        so.tau_kernel = opts.tau_kernel;
        so.seed = opts.seed;
        try {
            const RHSolution sol = solve(sys, so);
            const auto ansatz = holomorphic_ansatz(*grid, n);
            const double angle = sol.kernel_dim == static_cast<int>(ansatz.size())
                                     ? subspace_angle(ansatz, sol.kernel)
                                     : kPi / 2;
            const double secs = seconds_since(tc);
            const bool case_ok = sol.kernel_dim == 2 * n + 1 && sol.gap_ratio >= 1e3 && angle <= 1e-4 &&
                                 (!opts.enforce_runtime || secs < 60.0);
            ok = ok && case_ok;
            d << (n ? "; " : "") << "n=" << n << ": dim " << sol.kernel_dim << " (expect " << 2 * n + 1 << "), gap "
              << sci(sol.gap_ratio) << ", ansatz angle " << sci(angle) << ", " << fixed(secs, 1) << " s";
        } catch (const IndeterminateError& e) {
            ok = false;
            d << (n ? "; " : "") << "n=" << n << ": " << e.what();
        }
        if (opts.log) opts.log("  [2] n=" + std::to_string(n) + " done");
    }
    r.seconds = seconds_since(t0);
    r.pass = ok;
    r.detail = d.str();
    return r;
}

// ------------------------------------------------------------------ 3

BoundaryData cap_boundary(int n)
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

CheckResult check_cap_law(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 3;
    r.name = "cap kernel-dimension law with fixed point";
    const auto t0 = Clock::now();
    const Cap cap(opts.cap_grid);
    SolveOptions so;
    so.tau_kernel = opts.tau_kernel;
    so.seed = opts.seed;
    bool ok = true;
    std::ostringstream d;
    std::mt19937 rng(opts.seed);
    for (DeformationKind kind : kSolverKinds) {
        for (int n : {1, 0, -1}) {
            BoundaryData bd = cap_boundary(n);
            if (n == -1) {
                std::normal_distribution<double> nd;
                for (int k = 0; k <= 3; ++k) {
                    bd.gamma_rate.cos_coef.push_back(nd(rng));
                    bd.gamma_rate.sin_coef.push_back(k == 0 ? 0.0 : nd(rng));
                }
            }
            const BoundaryCondition bc = boundary_coefficients(cap.im, cap.metric, bd);
            LinearSystem ls = assemble_linear_system(cap.base, kind, bc, 0);
            if (n == 0) {
                // manufactured data from a known field vanishing at the fixed point
                std::mt19937 mrng(opts.seed + 17);
                const auto x = stack_field(smooth_random_field(*cap.grid, mrng, 0.2, true));
                const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
                const Eigen::VectorXd bi = ls.interior * xv, bb = ls.boundary * xv;
                ls.interior_rhs.assign(bi.data(), bi.data() + bi.size());
                ls.boundary_rhs.assign(bb.data(), bb.data() + bb.size());
            }
            const RHSystem sys = make_rh_system(ls);
            std::ostringstream c;
            c << to_string(kind) << " n=" << bc.index;
            try {
                const RHSolution sol = solve(sys, so);
                const double rel = sol.data_norm > 0.0 ? sol.residual_norm / sol.data_norm : 0.0;
                bool case_ok = bc.index == n;
                c << ": dim " << sol.kernel_dim << ", gap " << sci(sol.gap_ratio);
                if (n == 1) {
                    case_ok = case_ok && sol.kernel_dim == 1;
                } else if (n == 0) {
                    case_ok = case_ok && sol.kernel_dim == 0 && rel <= 1e-6;
                    c << ", manufactured residual " << sci(rel);
                } else {
                    case_ok = case_ok && sol.kernel_dim == 0 && rel >= 1e-2;
                    c << ", generic-data residual " << sci(rel);
                }
                ok = ok && case_ok;
            } catch (const IndeterminateError& e) {
                ok = false;
                c << ": " << e.what();
            }
            d << (d.tellp() > 0 ? "; " : "") << c.str();
            if (opts.log) opts.log("  [3] " + c.str());
        }
    }
    r.seconds = seconds_since(t0);
    const bool in_time = !opts.enforce_runtime || r.seconds < 300.0;
    r.pass = ok && in_time;
    d << "; total " << fixed(r.seconds, 1) << " s (limit 300 s)";
    r.detail = d.str();
    return r;
}

// ------------------------------------------------------------------ 4

CheckResult check_closed(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 4;
    r.name = "closed-surface kernel law";
    const auto t0 = Clock::now();
    auto grid = std::make_shared<PolarGrid>(opts.closed_grid);
    const MetricField metric = MetricField::euclidean();
    const ClosedSurface cs = two_chart_sphere(1.0, grid, metric);
    const auto tf = closed_translation_fields(cs, metric);
    const std::vector<std::vector<double>> translations(tf.begin(), tf.end());
    SolveOptions so;
    so.tau_kernel = opts.tau_kernel;
    so.seed = opts.seed;
    bool ok = true;
    std::ostringstream d;
    for (DeformationKind kind : kSolverKinds) {
        for (bool fixed_point : {false, true}) {
            std::ostringstream c;
            c << to_string(kind) << (fixed_point ? " fixed" : " free");
            const RHSystem sys = glue_closed_system(cs, kind, metric, fixed_point ? std::optional<int>(0) : std::nullopt);
            bool case_ok = false;
            try {
                const RHSolution sol = solve(sys, so);
                c << ": dim " << sol.kernel_dim << ", gap " << sci(sol.gap_ratio);
                if (!fixed_point) {
                    double null_max = 0.0;
                    for (const auto& t : translations) null_max = std::max(null_max, null_residual(sys, t, sol.sigma_max));
                    const double angle = sol.kernel_dim == 3 ? subspace_angle(translations, sol.kernel) : kPi / 2;
                    c << ", translation angle " << sci(angle) << ", translation residual " << sci(null_max);
                    case_ok = sol.kernel_dim == 3 && angle <= 1e-4 && null_max <= 1e-6;
                } else {
                    case_ok = sol.kernel_dim == 0;
                }
            } catch (const IndeterminateError& e) {
                c << ": " << e.what();
            }
            ok = ok && case_ok;
            r.parts.emplace_back(to_string(kind) + (fixed_point ? " fixed" : " free"), case_ok);
            d << (d.tellp() > 0 ? "; " : "") << c.str();
            if (opts.log) opts.log("  [4] " + c.str());
        }
    }
    r.seconds = seconds_since(t0);
    const bool in_time = !opts.enforce_runtime || r.seconds < 600.0;
    r.pass = ok && in_time;
    d << "; total " << fixed(r.seconds, 1) << " s (limit 600 s)";
    r.detail = d.str();
    return r;
}

// ------------------------------------------------------------------ 5

CheckResult check_jacobian(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 5;
    r.name = "Jacobian fidelity";
    const auto t0 = Clock::now();
    const Cap cap(opts.small_grid);
    constexpr double eps = 1e-4;
    double worst = 0.0;
    std::ostringstream d;
    for (DeformationKind kind : kAllKinds) {
        const LinearSystem ls = assemble_linear_system(cap.base, kind, std::nullopt, std::nullopt);
        std::mt19937 rng(opts.seed + 101 * static_cast<unsigned>(kind));
        double kind_worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            const DeformationField dir = smooth_random_field(*cap.grid, rng, 0.3, false);
            const auto x = stack_field(dir);
            const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
            const Eigen::VectorXd Ld = ls.interior * xv;
            const auto rp = full_residual(cap.base, kind, scaled(dir, eps));
            const auto rm = full_residual(cap.base, kind, scaled(dir, -eps));
            double err = 0.0;
            for (std::size_t i = 0; i < rp.size(); ++i) {
                const double e = (rp[i] - rm[i]) / (2 * eps) - Ld(static_cast<Eigen::Index>(i));
                err += e * e;
            }
            kind_worst = std::max(kind_worst, std::sqrt(err) / Ld.norm());
        }
        worst = std::max(worst, kind_worst);
        d << (d.tellp() > 0 ? ", " : "") << to_string(kind) << " " << sci(kind_worst);
    }
    r.seconds = seconds_since(t0);
    r.pass = worst <= 1e-6 && (!opts.enforce_runtime || r.seconds < 120.0);
    r.detail = "max relative error over 20 directions: " + d.str() + " (tol 1e-6); " + fixed(r.seconds, 1) + " s";
    return r;
}

// ------------------------------------------------------------------ 6

CheckResult check_remainder(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 6;
    r.name = "remainder smallness";
    const auto t0 = Clock::now();
    const Cap cap(opts.small_grid);
    const std::vector<double> scales{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double worst = std::numeric_limits<double>::infinity();
    std::ostringstream d;
    for (DeformationKind kind : kAllKinds) {
        const LinearSystem ls = assemble_linear_system(cap.base, kind, std::nullopt, std::nullopt);
        std::mt19937 rng(opts.seed + 7 * static_cast<unsigned>(kind));
        const DeformationField dir = smooth_random_field(*cap.grid, rng, 0.3, false);
        const ExpansionCheck ec = remainder_check(cap.base, kind, ls, dir, scales);
        worst = std::min(worst, ec.fitted_order);
        d << (d.tellp() > 0 ? ", " : "") << to_string(kind) << " " << fixed(ec.fitted_order, 3);
    }
    r.seconds = seconds_since(t0);
    r.pass = worst >= 1.9;
    r.detail = "fitted exponent: " + d.str() + " (min 1.9)";
    return r;
}

// ------------------------------------------------------------------ 7

CheckResult check_drift(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 7;
    r.name = "invariant drift under evolution";
    const auto t0 = Clock::now();
    const Cap cap(opts.evolution_grid);
    bool ok = true;
    std::ostringstream d;
    for (DeformationKind kind : {DeformationKind::H, DeformationKind::A}) {
        EvolutionProblem pb;
        pb.base = &cap.base;
        pb.kind = kind;
        pb.boundary = cap_boundary(1);
        pb.fix_point = 0;
        pb.kernel_coeffs = {1.0};
        pb.solve.tau_kernel = opts.tau_kernel;
        pb.solve.seed = opts.seed;
        std::ostringstream c;
        c << to_string(kind) << ": ";
        try {
            const auto coarse = run(pb, 0.1, 0.01);
            if (opts.log) opts.log("  [7] " + to_string(kind) + " dt=0.01 done");
            const auto halved = run(pb, 0.1, 0.005);
            const double d1 = coarse.history.back().drift, d2 = halved.history.back().drift;
            const double ratio = d2 > 0.0 ? d1 / d2 : 0.0;
            c << "drift " << sci(d1) << " (dt 0.01), " << sci(d2) << " (dt 0.005), ratio " << fixed(ratio, 3);
            ok = ok && d1 <= 5e-3 && ratio >= 1.7 && ratio <= 2.3;
        } catch (const std::exception& e) {
            ok = false;
            c << e.what();
        }
        d << (d.tellp() > 0 ? "; " : "") << c.str();
        if (opts.log) opts.log("  [7] " + c.str());
    }
    r.seconds = seconds_since(t0);
    r.pass = ok;
    r.detail = d.str() + " (drift <= 5e-3, ratio in [1.7, 2.3])";
    return r;
}

// ------------------------------------------------------------------ 8

// Immersion whose derivatives are taken from the sampled positions with the
// grid stencils (the discrete geometry path).
Immersion sampled_immersion(const Immersion& exact)
{
    const PolarGrid& grid = *exact.grid;
    Immersion im;
    im.grid = exact.grid;
    im.jets.resize(exact.jets.size());
    std::vector<double> comp(grid.num_nodes());
    for (int s = 0; s < 3; ++s) {
        for (int p = 0; p < grid.num_nodes(); ++p) comp[p] = exact.jets[p].y(s);
        const auto d1 = apply_op(grid.d1(), comp), d2 = apply_op(grid.d2(), comp);
        const auto d11 = apply_op(grid.d11(), comp), d12 = apply_op(grid.d12(), comp),
                   d22 = apply_op(grid.d22(), comp);
        for (int p = 0; p < grid.num_nodes(); ++p) {
            auto& j = im.jets[p];
            j.y(s) = comp[p];
            j.dy[0](s) = d1[p];
            j.dy[1](s) = d2[p];
            j.d2y[0](s) = d11[p];
            j.d2y[1](s) = d12[p];
            j.d2y[2](s) = d22[p];
        }
    }
    return im;
}

CheckResult check_geometry(const VerifyOptions&)
{
    CheckResult r;
    r.id = 8;
    r.name = "geometry oracles";
    const auto t0 = Clock::now();
    const MetricField metric = MetricField::euclidean();
    std::array<double, 2> eh{}, ek{}, hs{};
    const std::array<GridSpec, 2> specs{GridSpec{8, 32}, GridSpec{16, 64}};
    double exact_err = 0.0;
    for (int g = 0; g < 2; ++g) {
        auto grid = std::make_shared<PolarGrid>(specs[g]);
        const Immersion exact = build_immersion(Chart::stereographic_sphere(1.0), grid);
        const FundamentalForms fe = fundamental_forms(exact, metric);
        for (const auto& pf : fe.points) exact_err = std::max({exact_err, std::abs(pf.H - 1), std::abs(pf.K - 1)});
        const FundamentalForms fs = fundamental_forms(sampled_immersion(exact), metric);
        for (const auto& pf : fs.points) {
            eh[g] = std::max(eh[g], std::abs(pf.H - 1));
            ek[g] = std::max(ek[g], std::abs(pf.K - 1));
        }
        hs[g] = grid->h();
    }
    const double order_h = std::log(eh[0] / eh[1]) / std::log(2.0);
    const double order_k = std::log(ek[0] / ek[1]) / std::log(2.0);
    const double c_h = eh[0] / (hs[0] * hs[0]), c_k = ek[0] / (hs[0] * hs[0]);
    const bool within = eh[1] <= c_h * hs[1] * hs[1] && ek[1] <= c_k * hs[1] * hs[1];

    auto grid = std::make_shared<PolarGrid>(GridSpec{24, 96});
    const ClosedSurface cs = two_chart_sphere(1.0, grid, metric);
    const double area = area_element(cs.plus_forms, *grid).total + area_element(cs.minus_forms, *grid).total;
    const double area_err = std::abs(area - 4 * kPi);

    r.seconds = seconds_since(t0);
    r.pass = order_h >= 1.9 && order_k >= 1.9 && within && area_err <= 1e-3 && exact_err <= 1e-9;
    std::ostringstream d;
    d << "max|H-1| " << sci(eh[0]) << " -> " << sci(eh[1]) << " (order " << fixed(order_h) << "), max|K-1| "
      << sci(ek[0]) << " -> " << sci(ek[1]) << " (order " << fixed(order_k) << ") on sampled charts 8x32 -> 16x64; "
      << "analytic-jet error " << sci(exact_err) << "; two-chart area error " << sci(area_err) << " at 24x96";
    r.detail = d.str();
    return r;
}

// ------------------------------------------------------------------ 9

// Exact jet of the frame components of a constant ambient vector e
// (Euclidean ambient), from differentiating e = a^j y_{,j} + c n with the
// analytic chart jets.
FieldJet translation_jet(const Immersion& im, const FundamentalForms& forms, int p, const Vec3& e)
{
    const NodeJet& j = im.jets[p];
    const PointForms& pf = forms.points[p];
    const Mat2 ginv = pf.g.inverse();
    auto tangential = [&](const Vec3& v) {
        const Eigen::Vector2d rhs(j.dy[0].dot(v), j.dy[1].dot(v));
        return Eigen::Vector2d(ginv * rhs);
    };
    FieldJet f{};
    const Eigen::Vector2d a = tangential(e);
    const double c = pf.n.dot(e);
    std::array<Eigen::Vector2d, 2> da;
    std::array<double, 2> dc{};
    for (int i = 0; i < 2; ++i) {
        const Vec3 w = a(0) * j.d2y[sym2(0, i)] + a(1) * j.d2y[sym2(1, i)] + c * pf.dn[i];
        da[i] = -tangential(w);
        dc[i] = pf.dn[i].dot(e);
    }
    f[0][0] = a(0);
    f[1][0] = a(1);
    f[2][0] = c;
    for (int i = 0; i < 2; ++i) {
        f[0][1 + i] = da[i](0);
        f[1][1 + i] = da[i](1);
        f[2][1 + i] = dc[i];
    }
    for (int i = 0; i < 2; ++i)
        for (int l = i; l < 2; ++l) {
            Vec3 w = c * pf.d2n[sym2(i, l)] + dc[i] * pf.dn[l] + dc[l] * pf.dn[i];
            for (int k = 0; k < 2; ++k)
                w += da[i](k) * j.d2y[sym2(k, l)] + da[l](k) * j.d2y[sym2(k, i)] + a(k) * j.d3y[sym3(k, i, l)];
            const Eigen::Vector2d dda = -tangential(w);
            const int col = 3 + sym2(i, l);
            f[0][col] = dda(0);
            f[1][col] = dda(1);
            f[2][col] = pf.d2n[sym2(i, l)].dot(e);
        }
    return f;
}

CheckResult check_g_fidelity(const VerifyOptions& opts)
{
    CheckResult r;
    r.id = 9;
    r.name = "G-fidelity and transport";
    const auto t0 = Clock::now();
    auto grid = std::make_shared<PolarGrid>(opts.small_grid);
    const MetricField flat = MetricField::euclidean();
    const Immersion im = build_immersion(Chart::stereographic_sphere(1.0), grid);
    const FundamentalForms forms = fundamental_forms(im, flat);
    const BaseSurface base{&im, &forms, &flat};
    auto max_g = [&](const DeformationField& f) {
        double m = 0.0;
        for (const auto& g : g_residual(base, f)) m = std::max(m, std::hypot(g[0], g[1]));
        return m;
    };
    double g_trans = 0.0, g_trans_stencil = 0.0;
    for (int s = 0; s < 3; ++s) {
        const Vec3 e = 0.1 * Vec3::Unit(s);
        for (int p = 0; p < grid->num_nodes(); ++p) {
            const NodeResidual nr = node_residual(base, DeformationKind::H, p, translation_jet(im, forms, p, e));
            g_trans = std::max(g_trans, std::hypot(nr.g1, nr.g2));
        }
    }
    for (const auto& t : translation_fields(base)) g_trans_stencil = std::max(g_trans_stencil, max_g(scaled(t, 0.1)));
    DeformationField homothety = DeformationField::zeros(grid->num_nodes());
    std::fill(homothety.c.begin(), homothety.c.end(), 0.05);
    const double g_hom = max_g(homothety);

    const MetricField curved = MetricField::constant_curvature(1.0);
    std::mt19937 rng(opts.seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    double worst = 0.0;
    for (int path_no = 0; path_no < 100; ++path_no) {
        std::vector<Vec3> path;
        Vec3 y(1.5 * ud(rng), 1.5 * ud(rng), 1.5 * ud(rng));
        path.push_back(y);
        const int segments = 1 + path_no % 4;
        for (int s = 0; s < segments; ++s) {
            y += 0.3 * Vec3(ud(rng), ud(rng), ud(rng));
            path.push_back(y);
        }
        const Vec3 v0(nd(rng), nd(rng), nd(rng));
        const Vec3 v1 = parallel_transport(curved, path, v0);
        const double n0 = ambient_dot(curved, path.front(), v0, v0);
        const double n1 = ambient_dot(curved, path.back(), v1, v1);
        worst = std::max(worst, std::abs(n1 - n0) / n0);
    }

    r.seconds = seconds_since(t0);
    r.pass = g_trans <= 1e-9 && g_hom <= 1e-9 && worst <= 1e-8;
    std::ostringstream d;
    d << "G residual: translations " << sci(g_trans) << ", homothety " << sci(g_hom)
      << " (tol 1e-9; translations with stencil-differentiated components " << sci(g_trans_stencil)
      << "); transport norm drift over 100 paths (kappa=1) " << sci(worst) << " (tol 1e-8)";
    r.detail = d.str();
    return r;
}

} // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts)
{
    using Check = CheckResult (*)(const VerifyOptions&);
    const std::array<Check, 9> checks{check_index,    check_holomorphic, check_cap_law,  check_closed,    check_jacobian,
                                      check_remainder, check_drift,      check_geometry, check_g_fidelity};
    std::vector<CheckResult> out;
    for (int id = 1; id <= 9; ++id) {
        if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
        if (opts.log) opts.log("running check " + std::to_string(id));
        CheckResult res;
        try {
            res = checks[id - 1](opts);
        } catch (const std::exception& e) {
            res.id = id;
            res.name = "check " + std::to_string(id);
            res.pass = false;
            res.detail = std::string("error: ") + e.what();
        }
        if (opts.on_result) opts.on_result(res);
        out.push_back(std::move(res));
    }
    return out;
}

std::string format_result(const CheckResult& r)
{
    std::ostringstream os;
    os << "[" << (r.pass ? "PASS" : "FAIL") << "] " << r.id << ". " << r.name << " -- " << r.detail;
    return os.str();
}

} // namespace rdeform
