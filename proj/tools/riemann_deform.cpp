// riemann-deform: geometry inspection, boundary index, single solves,
// evolutions, closed-surface runs and the verification suite.
//
// Exit codes: 0 success, 1 verification failure or unexpected error,
// 2 configuration error, 3 numerical indeterminacy or failure,
// 4 admittance failure.

#include "rdeform/complex_form.hpp"
#include "rdeform/config.hpp"
#include "rdeform/evolve.hpp"
#include "rdeform/report_io.hpp"
#include "rdeform/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

using namespace rdeform;
using ojson = nlohmann::ordered_json;

namespace {

struct Flags {
    std::string config;
    std::string out = "riemann-deform-out";
    std::string grid;
    double tau_kernel = -1.0;
    unsigned seed = 0;
};

struct Context {
    Flags flags;
    RunConfig cfg;
};

std::string out_path(const Flags& f, const std::string& name)
{
    return (std::filesystem::path(f.out) / name).string();
}

Context load(const Flags& flags, const std::string& command)
{
    if (flags.config.empty()) throw ConfigError(command + ": --config is required");
    Context ctx{flags, load_config(flags.config)};
    if (!flags.grid.empty()) {
        ctx.cfg.grid = parse_grid(flags.grid);
        if (ctx.cfg.fix_point && *ctx.cfg.fix_point >= ctx.cfg.grid.num_nodes())
            throw ConfigError("config: fix_point: node index out of range for the grid");
    }
    if (flags.tau_kernel > 0.0) ctx.cfg.tau_kernel = flags.tau_kernel;
    return ctx;
}

void write_json(const Flags& f, const std::string& name, const ojson& doc)
{
    write_file_atomic(out_path(f, name), doc.dump(2) + "\n");
}

// The accepted config, byte for byte, next to the results.
void emit_config(const Context& ctx)
{
    write_file_atomic(out_path(ctx.flags, "config.json"), ctx.cfg.text);
}

ojson base_report(const Context& ctx, const std::string& command)
{
    ojson r;
    r["command"] = command;
    r["seed"] = ctx.flags.seed;
    r["grid"] = {{"n_r", ctx.cfg.grid.n_r}, {"n_theta", ctx.cfg.grid.n_theta}};
    r["kind"] = to_string(ctx.cfg.kind);
    r["tau_kernel"] = ctx.cfg.tau_kernel;
    return r;
}

ojson stats(const std::vector<double>& v)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    return {{"min", lo}, {"max", hi}, {"mean", v.empty() ? 0.0 : sum / static_cast<double>(v.size())}};
}

struct Surface {
    std::shared_ptr<const PolarGrid> grid;
    Immersion im;
    FundamentalForms forms;
};

Surface make_surface(const RunConfig& cfg, bool admit = true)
{
    Surface s;
    s.grid = std::make_shared<PolarGrid>(cfg.grid);
    s.im = build_immersion(cfg.chart, s.grid);
    s.forms = fundamental_forms(s.im, cfg.metric, admit);
    return s;
}

SolveOptions solve_options(const Context& ctx)
{
    SolveOptions so;
    so.tau_kernel = ctx.cfg.tau_kernel;
    so.seed = ctx.flags.seed;
    return so;
}

// ------------------------------------------------------------ commands

int cmd_geometry(const Flags& flags)
{
    const Context ctx = load(flags, "geometry");
    const Surface s = make_surface(ctx.cfg);
    const auto ci = verify_conjugate_isothermal(s.forms, 1e-8);
    const auto area = area_element(s.forms, *s.grid);
    std::vector<double> H, K, k1, k2, sg;
    for (const auto& pf : s.forms.points) {
        H.push_back(pf.H);
        K.push_back(pf.K);
        k1.push_back(pf.k1);
        k2.push_back(pf.k2);
        sg.push_back(pf.sqrt_g);
    }
    const auto bounds = ctx.cfg.metric.verify_bounds();

    emit_config(ctx);
    write_file_atomic(out_path(flags, "forms.csv"), forms_csv(s.im, s.forms));
    ojson r = base_report(ctx, "geometry");
    r["summary"] = {{"H", stats(H)}, {"K", stats(K)}, {"k1", stats(k1)}, {"k2", stats(k2)}, {"sqrt_g", stats(sg)}};
    r["area"] = area.total;
    r["admitted"] = s.forms.admitted;
    r["conjugate_isothermal"] = {{"max_b12", ci.max_b12},
                                 {"max_b11_minus_b22", ci.max_b11_minus_b22},
                                 {"pass", ci.pass}};
    r["metric_bounds"] = {{"max_value", bounds.max_value},
                          {"max_first", bounds.max_first},
                          {"max_second", bounds.max_second},
                          {"bound", bounds.bound},
                          {"pass", bounds.pass}};
    write_json(flags, "report.json", r);

    std::cout << "area = " << area.total << "\n"
              << "H in [" << r["summary"]["H"]["min"].get<double>() << ", " << r["summary"]["H"]["max"].get<double>()
              << "], K in [" << r["summary"]["K"]["min"].get<double>() << ", "
              << r["summary"]["K"]["max"].get<double>() << "]\n"
              << "conjugate isothermal: " << (ci.pass ? "yes" : "no") << "\n";
    return 0;
}

int cmd_index(const Flags& flags)
{
    const Context ctx = load(flags, "index");
    const Surface s = make_surface(ctx.cfg);
    const BoundaryCondition bc = boundary_coefficients(s.im, ctx.cfg.metric, ctx.cfg.boundary);
    emit_config(ctx);
    ojson r = base_report(ctx, "index");
    r["index"] = bc.index;
    double lmin = std::numeric_limits<double>::infinity();
    for (const auto& lt : bc.lambda_tilde) lmin = std::min(lmin, std::hypot(lt[0], lt[1]));
    r["min_abs_lambda_tilde"] = lmin;
    write_json(flags, "report.json", r);
    std::cout << "n = " << bc.index << "\n";
    return 0;
}

int cmd_solve(const Flags& flags)
{
    const Context ctx = load(flags, "solve");
    const Surface s = make_surface(ctx.cfg);
    const BaseSurface base{&s.im, &s.forms, &ctx.cfg.metric};
    const BoundaryCondition bc = boundary_coefficients(s.im, ctx.cfg.metric, ctx.cfg.boundary);
    const LinearSystem ls = assemble_linear_system(base, ctx.cfg.kind, bc, ctx.cfg.fix_point);
    const ComplexFormReport cf = to_complex_form(ls);
    const RHSystem sys = make_rh_system(ls);
    emit_config(ctx);
    const RHSolution sol = solve(sys, solve_options(ctx));
    const SolvabilityReport sr = solvability_residual(sys, sol);

    write_file_atomic(out_path(flags, "solution.csv"), final_state_csv(s.im, s.forms, unstack_field(sol.particular)));
    write_file_atomic(out_path(flags, "kernel.csv"), kernel_csv(*s.grid, sol.kernel));
    write_file_atomic(out_path(flags, "spectrum.csv"), spectrum_csv(sol.spectrum));
    write_file_atomic(out_path(flags, "coefficients.csv"), coefficients_csv(*s.grid, cf));

    ojson r = base_report(ctx, "solve");
    r["index"] = bc.index;
    r["fix_point"] = ctx.cfg.fix_point ? ojson(*ctx.cfg.fix_point) : ojson(nullptr);
    r["kernel_dim"] = sol.kernel_dim;
    r["gap_ratio"] = sol.gap_ratio;
    r["sigma_max"] = sol.sigma_max;
    r["residual_norm"] = sol.residual_norm;
    r["data_norm"] = sol.data_norm;
    r["solvability"] = {{"interior", sr.interior},
                        {"boundary", sr.boundary},
                        {"constraint", sr.constraint},
                        {"overall", sr.overall}};
    r["complex_form"] = {{"available", cf.available},
                         {"reason", cf.reason},
                         {"max_fit_residual", cf.max_fit_residual},
                         {"min_pivot", cf.min_pivot}};
    write_json(flags, "report.json", r);

    std::cout << "n = " << bc.index << "\nkernel_dim = " << sol.kernel_dim << " (gap ratio " << sol.gap_ratio
              << ")\nresidual = " << sr.overall << "\n";
    return 0;
}

int cmd_evolve(const Flags& flags)
{
    const Context ctx = load(flags, "evolve");
    const Surface s = make_surface(ctx.cfg);
    const BaseSurface base{&s.im, &s.forms, &ctx.cfg.metric};
    EvolutionProblem pb;
    pb.base = &base;
    pb.kind = ctx.cfg.kind;
    pb.boundary = ctx.cfg.boundary;
    pb.gamma_rate_slope = ctx.cfg.gamma_rate_slope;
    pb.fix_point = ctx.cfg.fix_point;
    pb.kernel_coeffs = ctx.cfg.kernel_coeffs;
    pb.solve = solve_options(ctx);
    if (ctx.cfg.smallness_budget) pb.smallness_budget = *ctx.cfg.smallness_budget;
    emit_config(ctx);

    EvolutionState last = initial_state(base);
    std::string error;
    int code = 0;
    try {
        last = run(pb, ctx.cfg.t0, ctx.cfg.dt, [&](const EvolutionState& st) {
            last = st;
            const auto& d = st.history.back();
            std::cout << "t = " << d.t << "  drift = " << d.drift << "  g = " << d.g_residual
                      << "  kernel_dim = " << d.kernel_dim << "\n";
        });
    } catch (const IndeterminateError& e) {
        error = e.what();
        code = 3;
    } catch (const NumericalError& e) {
        error = e.what();
        code = 3;
    } catch (const AdmittanceError& e) {
        error = e.what();
        code = 4;
    } catch (const ConfigError& e) {
        error = e.what();
        code = 2;
    }

    write_file_atomic(out_path(flags, "trajectory.csv"), trajectory_csv(last.history, ctx.cfg.kind));
    write_file_atomic(out_path(flags, "final_state.csv"), final_state_csv(s.im, s.forms, last.field));

    double drift = 0.0, g = 0.0;
    bool dims_constant = true;
    for (std::size_t i = 0; i < last.history.size(); ++i) {
        drift = std::max(drift, last.history[i].drift);
        g = std::max(g, last.history[i].g_residual);
        if (i > 1 && last.history[i].kernel_dim != last.history[1].kernel_dim) dims_constant = false;
    }
    const double g_tol = 10.0 * ctx.cfg.dt * ctx.cfg.dt;
    ojson r = base_report(ctx, "evolve");
    r["t0"] = ctx.cfg.t0;
    r["dt"] = ctx.cfg.dt;
    r["t_reached"] = last.t;
    r["steps"] = last.history.size() - 1;
    r["completed"] = error.empty();
    if (!error.empty()) r["error"] = error;
    r["invariants"] = {
        {"drift", {{"value", drift}, {"tolerance", 5e-3}, {"pass", drift <= 5e-3}}},
        {"g_residual", {{"value", g}, {"tolerance", g_tol}, {"pass", g <= g_tol}}},
        {"kernel_dim_constant", {{"pass", dims_constant}}},
    };
    write_json(flags, "report.json", r);
    if (!error.empty()) std::cerr << "error: " << error << "\n";
    return code;
}

int cmd_closed(const Flags& flags)
{
    const Context ctx = load(flags, "closed");
    if (ctx.cfg.chart.kind != ChartKind::StereographicSphere)
        throw ConfigError("closed: chart must be a stereographic_sphere (the two charts are built from it)");
    auto grid = std::make_shared<PolarGrid>(ctx.cfg.grid);
    const ClosedSurface cs = two_chart_sphere(ctx.cfg.chart.radius, grid, ctx.cfg.metric);
    const RHSystem sys = glue_closed_system(cs, ctx.cfg.kind, ctx.cfg.metric, ctx.cfg.fix_point);
    emit_config(ctx);
    const RHSolution sol = solve(sys, solve_options(ctx));

    write_file_atomic(out_path(flags, "kernel.csv"), kernel_csv(*grid, sol.kernel, 2));
    write_file_atomic(out_path(flags, "spectrum.csv"), spectrum_csv(sol.spectrum));

    ojson r = base_report(ctx, "closed");
    r["fix_point"] = ctx.cfg.fix_point ? ojson(*ctx.cfg.fix_point) : ojson(nullptr);
    r["seam_mismatch"] = cs.seam_mismatch();
    r["kernel_dim"] = sol.kernel_dim;
    r["gap_ratio"] = sol.gap_ratio;
    r["sigma_max"] = sol.sigma_max;
    if (ctx.cfg.metric.is_flat()) {
        const auto tf = closed_translation_fields(cs, ctx.cfg.metric);
        ojson nr = ojson::array();
        for (const auto& t : tf) nr.push_back(null_residual(sys, t, sol.sigma_max));
        r["translation_null_residual"] = nr;
        if (!ctx.cfg.fix_point)
            r["translation_angle"] = subspace_angle({tf[0], tf[1], tf[2]}, sol.kernel);
    }
    write_json(flags, "report.json", r);
    std::cout << "kernel_dim = " << sol.kernel_dim << " (gap ratio " << sol.gap_ratio << ")\n";
    return 0;
}

int cmd_verify(const Flags& flags)
{
    VerifyOptions opts;
    if (!flags.grid.empty()) {
        const GridSpec g = parse_grid(flags.grid);
        opts.holomorphic_grid = opts.cap_grid = opts.closed_grid = opts.evolution_grid = opts.small_grid = g;
        opts.enforce_runtime = false;
    }
    if (flags.tau_kernel > 0.0) opts.tau_kernel = flags.tau_kernel;
    opts.seed = flags.seed;
    opts.log = [](const std::string& line) { std::cerr << line << "\n"; };
    opts.on_result = [](const CheckResult& r) { std::cout << format_result(r) << std::endl; };
    const auto results = run_verification(opts);

    ojson r;
    r["command"] = "verify";
    r["seed"] = flags.seed;
    ojson checks = ojson::array();
    bool all = true;
    for (const auto& c : results) {
        checks.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}});
        all = all && c.pass;
    }
    r["checks"] = checks;
    r["all_pass"] = all;
    write_json(flags, "report.json", r);

    std::cout << "\n" << std::count_if(results.begin(), results.end(), [](const CheckResult& c) { return c.pass; })
              << "/" << results.size() << " checks passed\n";
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"riemann-deform: numerical laboratory for surface deformations reduced to Riemann-Hilbert problems"};
    app.require_subcommand(1);
    Flags flags;
    app.add_option("--config", flags.config, "JSON run configuration");
    app.add_option("--out", flags.out, "output directory")->capture_default_str();
    app.add_option("--grid", flags.grid, "grid override, NRxNT (e.g. 32x128)");
    app.add_option("--tau-kernel", flags.tau_kernel, "relative singular-value threshold for the kernel (default 1e-7)");
    app.add_option("--seed", flags.seed, "seed for randomized checks (recorded in report.json)")->capture_default_str();

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const Flags&);
    };
    const Command commands[] = {
        {"geometry", "fundamental forms, curvatures and area of the configured chart", cmd_geometry},
        {"index", "index n of the configured boundary condition", cmd_index},
        {"solve", "solve the linearized boundary-value problem once", cmd_solve},
        {"evolve", "integrate the deformation from t = 0 to t0", cmd_evolve},
        {"closed", "closed two-chart sphere: kernel of the glued system", cmd_closed},
        {"verify", "run the verification suite; exit 0 iff every check passes", cmd_verify},
    };
    int (*selected)(const Flags&) = nullptr;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->fallthrough();
        sub->callback([&selected, fn = c.fn] { selected = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return selected(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IndeterminateError& e) {
        std::cerr << "indeterminate: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const AdmittanceError& e) {
        std::cerr << "admittance failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
