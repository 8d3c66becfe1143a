#include "rdeform/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace rdeform {

std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

void row(std::ostringstream& os, std::initializer_list<double> values)
{
    bool first = true;
    for (double v : values) {
        if (!first) os << ',';
        os << format_number(v);
        first = false;
    }
}

} // namespace

std::string forms_csv(const Immersion& im, const FundamentalForms& forms)
{
    const PolarGrid& grid = *im.grid;
    std::ostringstream os;
    os << "node,r,theta,y1,y2,y3,H,K,k1,k2,sqrt_g\n";
    for (int p = 0; p < im.num_nodes(); ++p) {
        const auto& y = im.jets[p].y;
        const auto& pf = forms.points[p];
        os << p << ',';
        row(os, {grid.r(p), grid.theta(p), y(0), y(1), y(2), pf.H, pf.K, pf.k1, pf.k2, pf.sqrt_g});
        os << '\n';
    }
    return os.str();
}

std::string final_state_csv(const Immersion& base, const FundamentalForms& base_forms, const DeformationField& field)
{
    const PolarGrid& grid = *base.grid;
    const auto z = ambient_field(base, base_forms, field);
    std::ostringstream os;
    os << "node,r,theta,a1,a2,c,y1,y2,y3\n";
    for (int p = 0; p < base.num_nodes(); ++p) {
        const Vec3 y = base.jets[p].y + z[p];
        os << p << ',';
        row(os, {grid.r(p), grid.theta(p), field.a1[p], field.a2[p], field.c[p], y(0), y(1), y(2)});
        os << '\n';
    }
    return os.str();
}

std::string trajectory_csv(const std::vector<EvolutionDiagnostics>& history, DeformationKind kind)
{
    std::ostringstream os;
    os << "step,t,drift_" << to_string(kind) << ",mean_drift_" << to_string(kind)
       << ",g_residual,kernel_dim,gap_ratio,rate_norm,data_norm\n";
    for (std::size_t s = 0; s < history.size(); ++s) {
        const auto& d = history[s];
        os << s << ',';
        row(os, {d.t, d.drift, d.mean_drift, d.g_residual});
        os << ',' << d.kernel_dim << ',';
        row(os, {d.gap_ratio, d.rate_norm, d.data_norm});
        os << '\n';
    }
    return os.str();
}

std::string coefficients_csv(const PolarGrid& grid, const ComplexFormReport& rep)
{
    std::ostringstream os;
    os << "node,r,theta,p1,p2,q1,q2,q0,A_re,A_im,B_re,B_im,E_re,E_im,Psi_re,Psi_im,fit_residual\n";
    if (!rep.available) return os.str();
    for (int p = 0; p < grid.num_nodes(); ++p) {
        os << p << ',';
        row(os, {grid.r(p), grid.theta(p), rep.p[p][0], rep.p[p][1], rep.q[p][0], rep.q[p][1], rep.q0[p],
                 rep.A[p].real(), rep.A[p].imag(), rep.B[p].real(), rep.B[p].imag(), rep.E[p].real(), rep.E[p].imag(),
                 rep.Psi[p].real(), rep.Psi[p].imag(), rep.fit_residual[p]});
        os << '\n';
    }
    return os.str();
}

std::string spectrum_csv(const std::vector<double>& spectrum)
{
    std::ostringstream os;
    os << "index,sigma_rel\n";
    for (std::size_t i = 0; i < spectrum.size(); ++i) os << i << ',' << format_number(spectrum[i]) << '\n';
    return os.str();
}

std::string kernel_csv(const PolarGrid& grid, const std::vector<std::vector<double>>& kernel, int charts)
{
    const int nn = grid.num_nodes();
    std::ostringstream os;
    os << "chart,node,r,theta";
    for (std::size_t k = 0; k < kernel.size(); ++k) os << ",a1_" << k << ",a2_" << k << ",c_" << k;
    os << '\n';
    for (int c = 0; c < charts; ++c)
        for (int p = 0; p < nn; ++p) {
            os << c << ',' << p << ',';
            row(os, {grid.r(p), grid.theta(p)});
            for (const auto& v : kernel) {
                const std::size_t base = 3 * (static_cast<std::size_t>(c) * nn + p);
                os << ',';
                row(os, {v[base], v[base + 1], v[base + 2]});
            }
            os << '\n';
        }
    return os.str();
}

} // namespace rdeform
