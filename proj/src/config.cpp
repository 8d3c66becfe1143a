#include "rdeform/config.hpp"

#include "json.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace rdeform {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ConfigError("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail(where, "unknown key \"" + key + "\"");
}

double number(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) fail(where, "missing key \"" + key + "\"");
    if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, const std::string& where, double fallback)
{
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

int integer(const json& v, const std::string& where)
{
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

std::string string(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) fail(where, "missing key \"" + key + "\"");
    if (!obj[key].is_string()) fail(where + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where)
{
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(where, "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

FourierSeries fourier(const json& v, const std::string& where)
{
    check_keys(v, where, {"cos", "sin"});
    FourierSeries f;
    if (v.contains("cos")) f.cos_coef = numbers(v["cos"], where + ".cos");
    if (v.contains("sin")) f.sin_coef = numbers(v["sin"], where + ".sin");
    return f;
}

MetricField parse_metric(const json& v)
{
    const std::string where = "metric";
    if (!v.is_object()) fail(where, "expected an object");
    const std::string kind = string(v, "kind", where);
    if (kind == "euclidean") {
        check_keys(v, where, {"kind", "bound"});
        return MetricField::euclidean(number_or(v, "bound", where, 10.0));
    }
    if (kind == "constant_curvature") {
        check_keys(v, where, {"kind", "kappa", "bound"});
        return MetricField::constant_curvature(number(v, "kappa", where), number_or(v, "bound", where, 10.0));
    }
    if (kind == "custom") {
        check_keys(v, where, {"kind", "coeffs", "bound"});
        if (!v.contains("coeffs")) fail(where, "missing key \"coeffs\"");
        static const char* names[] = {"11", "12", "13", "22", "23", "33"};
        const json& c = v["coeffs"];
        check_keys(c, where + ".coeffs", {"11", "12", "13", "22", "23", "33"});
        MetricCoeffTable table;
        for (int k = 0; k < 6; ++k) {
            if (!c.contains(names[k])) continue;
            const std::string w = where + ".coeffs." + names[k];
            if (!c[names[k]].is_array()) fail(w, "expected an array of [p, q, r, coef] terms");
            for (const auto& term : c[names[k]]) {
                if (!term.is_array() || term.size() != 4) fail(w, "expected [p, q, r, coef] terms");
                PolyTerm3 t{integer(term[0], w), integer(term[1], w), integer(term[2], w), 0.0};
                if (!term[3].is_number()) fail(w, "coefficient must be a number");
                if (t.p < 0 || t.q < 0 || t.r < 0 || t.p + t.q + t.r > 4) fail(w, "exponents must be >= 0 with total degree <= 4");
                t.coef = term[3].get<double>();
                table[k].push_back(t);
            }
        }
        return MetricField::custom(table, number_or(v, "bound", where, 10.0));
    }
    fail(where + ".kind", "expected \"euclidean\", \"constant_curvature\" or \"custom\"");
}

Chart parse_chart(const json& v)
{
    const std::string where = "chart";
    if (!v.is_object()) fail(where, "expected an object");
    const std::string kind = string(v, "kind", where);
    Chart chart;
    if (kind == "spherical_cap") {
        check_keys(v, where, {"kind", "radius", "extent"});
        chart = Chart::spherical_cap(number(v, "radius", where), number(v, "extent", where));
    } else if (kind == "stereographic_sphere") {
        check_keys(v, where, {"kind", "radius", "hemisphere"});
        Hemisphere h = Hemisphere::South;
        if (v.contains("hemisphere")) {
            const std::string s = string(v, "hemisphere", where);
            if (s == "north")
                h = Hemisphere::North;
            else if (s != "south")
                fail(where + ".hemisphere", "expected \"south\" or \"north\"");
        }
        chart = Chart::stereographic_sphere(number(v, "radius", where), h);
    } else if (kind == "custom") {
        check_keys(v, where, {"kind", "poly"});
        if (!v.contains("poly") || !v["poly"].is_array() || v["poly"].size() != 3)
            fail(where + ".poly", "expected three component term lists");
        std::array<std::vector<PolyTerm2>, 3> poly;
        for (int s = 0; s < 3; ++s) {
            const std::string w = where + ".poly[" + std::to_string(s) + "]";
            if (!v["poly"][s].is_array()) fail(w, "expected an array of [p, q, coef] terms");
            for (const auto& term : v["poly"][s]) {
                if (!term.is_array() || term.size() != 3 || !term[2].is_number()) fail(w, "expected [p, q, coef] terms");
                poly[s].push_back({integer(term[0], w), integer(term[1], w), term[2].get<double>()});
            }
        }
        chart = Chart::custom(poly);
    } else {
        fail(where + ".kind", "expected \"spherical_cap\", \"stereographic_sphere\" or \"custom\"");
    }
    chart.validate();
    return chart;
}

} // namespace

GridSpec parse_grid(const std::string& text)
{
    static const std::regex re(R"(\s*(\d+)\s*[xX]\s*(\d+)\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw ConfigError("grid: expected NRxNT, got \"" + text + "\"");
    GridSpec g{std::stoi(m[1]), std::stoi(m[2])};
    g.validate();
    return g;
}

RunConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    check_keys(doc, "top level",
               {"metric", "chart", "grid", "kind", "boundary", "t0", "dt", "kernel_coeffs", "fix_point", "tau_kernel",
                "smallness_budget"});

    RunConfig cfg;
    cfg.text = text;
    if (doc.contains("metric")) cfg.metric = parse_metric(doc["metric"]);
    if (doc.contains("chart")) cfg.chart = parse_chart(doc["chart"]);
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        check_keys(g, "grid", {"n_r", "n_theta"});
        if (!g.contains("n_r") || !g.contains("n_theta")) fail("grid", "needs \"n_r\" and \"n_theta\"");
        cfg.grid = {integer(g["n_r"], "grid.n_r"), integer(g["n_theta"], "grid.n_theta")};
        cfg.grid.validate();
    }
    if (doc.contains("kind")) {
        if (!doc["kind"].is_string()) fail("kind", "expected a string");
        cfg.kind = parse_kind(doc["kind"].get<std::string>());
    }
    if (doc.contains("boundary")) {
        const json& b = doc["boundary"];
        check_keys(b, "boundary", {"l_fourier", "gamma_rate_fourier", "gamma_rate_slope"});
        if (b.contains("l_fourier")) {
            check_keys(b["l_fourier"], "boundary.l_fourier", {"l1", "l2"});
            if (b["l_fourier"].contains("l1")) cfg.boundary.l1 = fourier(b["l_fourier"]["l1"], "boundary.l_fourier.l1");
            if (b["l_fourier"].contains("l2")) cfg.boundary.l2 = fourier(b["l_fourier"]["l2"], "boundary.l_fourier.l2");
        }
        if (b.contains("gamma_rate_fourier"))
            cfg.boundary.gamma_rate = fourier(b["gamma_rate_fourier"], "boundary.gamma_rate_fourier");
        if (b.contains("gamma_rate_slope"))
            cfg.gamma_rate_slope = fourier(b["gamma_rate_slope"], "boundary.gamma_rate_slope");
    }
    cfg.t0 = number_or(doc, "t0", "top level", 0.0);
    cfg.dt = number_or(doc, "dt", "top level", 0.01);
    if (cfg.t0 < 0.0) fail("t0", "must be >= 0");
    if (!(cfg.dt > 0.0)) fail("dt", "must be > 0");
    if (doc.contains("kernel_coeffs")) cfg.kernel_coeffs = numbers(doc["kernel_coeffs"], "kernel_coeffs");
    if (doc.contains("fix_point") && !doc["fix_point"].is_null()) {
        const json& f = doc["fix_point"];
        if (f.is_string()) {
            if (f.get<std::string>() != "center") fail("fix_point", "expected null, a node index or \"center\"");
            cfg.fix_point = 0;
        } else {
            cfg.fix_point = integer(f, "fix_point");
        }
        if (*cfg.fix_point < 0 || *cfg.fix_point >= cfg.grid.num_nodes())
            fail("fix_point", "node index out of range for the grid");
    }
    cfg.tau_kernel = number_or(doc, "tau_kernel", "top level", 1e-7);
    if (!(cfg.tau_kernel > 0.0 && cfg.tau_kernel < 1.0)) fail("tau_kernel", "must lie in (0, 1)");
    if (doc.contains("smallness_budget")) cfg.smallness_budget = number(doc, "smallness_budget", "top level");
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

} // namespace rdeform
