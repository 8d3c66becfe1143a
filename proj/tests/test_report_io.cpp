#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"

#include "rdeform/report_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace rdeform;

namespace {

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int count_lines(const std::string& s)
{
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("numbers round-trip exactly (property)")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1e-7) == "1e-07");
}

TEST_CASE("atomic writes create directories and leave no temporaries")
{
    const auto dir = std::filesystem::temp_directory_path() / "rdeform_report_io_test";
    std::filesystem::remove_all(dir);
    const auto target = dir / "nested" / "out.csv";
    write_file_atomic(target.string(), "a,b\n1,2\n");
    CHECK(read_file(target) == "a,b\n1,2\n");
    write_file_atomic(target.string(), "x\n");
    CHECK(read_file(target) == "x\n");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(target.parent_path())) ++entries;
    CHECK(entries == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("CSV layouts")
{
    test::CapFixture cap({8, 16});
    const int nn = cap.grid->num_nodes();
    const std::string forms = forms_csv(cap.im, cap.forms);
    CHECK(forms.rfind("node,r,theta,y1,y2,y3,H,K,k1,k2,sqrt_g\n", 0) == 0);
    CHECK(count_lines(forms) == nn + 1);

    std::mt19937 rng(1);
    const DeformationField f = test::random_field(*cap.grid, rng, 0.01);
    const std::string state = final_state_csv(cap.im, cap.forms, f);
    CHECK(state.rfind("node,r,theta,a1,a2,c,y1,y2,y3\n", 0) == 0);
    CHECK(count_lines(state) == nn + 1);
    // byte-identical on repetition
    CHECK(final_state_csv(cap.im, cap.forms, f) == state);

    std::vector<EvolutionDiagnostics> hist(3);
    hist[1].t = 0.01;
    hist[2].t = 0.02;
    const std::string traj = trajectory_csv(hist, DeformationKind::H);
    CHECK(traj.rfind("step,t,drift_H,", 0) == 0);
    CHECK(count_lines(traj) == 4);

    CHECK(spectrum_csv({1e-12, 0.5}) == "index,sigma_rel\n0,1e-12\n1,0.5\n");

    const std::vector<std::vector<double>> kernel{std::vector<double>(3 * nn, 1.0)};
    const std::string k = kernel_csv(*cap.grid, kernel);
    CHECK(k.rfind("chart,node,r,theta,a1_0,a2_0,c_0\n", 0) == 0);
    CHECK(count_lines(k) == nn + 1);
    const std::vector<std::vector<double>> two_chart{std::vector<double>(6 * nn, 1.0)};
    CHECK(count_lines(kernel_csv(*cap.grid, two_chart, 2)) == 2 * nn + 1);
}
