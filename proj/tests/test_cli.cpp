#include "doctest.h"

#include "lob/config.hpp"
#include "lob/csv.hpp"
#include "lob/errors.hpp"
#include "lob/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace lob;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lob_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

std::vector<ConfigIssue> issues_of(const std::string& text) {
    try {
        validate_config(text);
    } catch (const ConfigError& e) {
        return e.issues();
    }
    return {};
}

const char* kSmall = R"(scenario = small
grid.s_min = 0
grid.s_max = 10
grid.n_cells = 100
initial.kind = uniform_above_cutoff
initial.depth = 1
initial.cutoff = 4
initial.extent = 2
take_liquidity = 0.5
t_end = 2
output.count = 4
)";

int lobsim(const std::string& args) {
    const std::string cmd = std::string(LOBSIM_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("built-in configs parse cleanly") {
    const auto names = builtin_scenarios();
    for (const char* n : {"fig5_unlimited", "fig6_limited", "barenblatt_golden"}) {
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
        CHECK_NOTHROW(load_config(n));
        CHECK_NOTHROW(load_config(std::string(n) + ".cfg"));
    }
    const auto fig5 = load_config("fig5_unlimited");
    CHECK(fig5.n_cells >= 800);
    CHECK(fig5.output_dir == "out/fig5_unlimited");
    CHECK(fig5.solver.output_times.size() == 10);
    CHECK(fig5.solver.output_times.back() == fig5.solver.t_end);
    CHECK_FALSE(fig5.echo.empty());

    const auto fig6 = load_config("fig6_limited");
    CHECK(fig6.bc.touch.kind == BcKind::FirmStop);
    CHECK(fig6.bc.touch.value == 0.0);

    const auto text = builtin_file("fig5_unlimited.cfg");
    REQUIRE(text);
    CHECK(validate_config(*text).name == "fig5_unlimited");
    CHECK_THROWS_AS(load_config("no_such_scenario"), Error);
}

TEST_CASE("a type mismatch is reported once with its line") {
    std::string text = kSmall;
    text.replace(text.find("t_end = 2"), 9, "t_end = fast");
    const auto issues = issues_of(text);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].key == "t_end");
    CHECK(issues[0].line == 10);
}

TEST_CASE("a missing grid block is reported key by key") {
    const auto issues =
        issues_of("initial.kind = uniform_above_cutoff\ninitial.depth = 1\ninitial.cutoff = 2\nt_end = 1\n");
    std::set<std::string> keys;
    for (const auto& i : issues) keys.insert(i.key);
    CHECK(keys == std::set<std::string>{"grid.s_min", "grid.s_max", "grid.n_cells"});
    for (const auto& i : issues) CHECK(i.line == 0);
}

TEST_CASE("every problem is collected") {
    const std::string text = std::string(kSmall) +
                             "colour = blue\n"
                             "params.beta = -1x\n"
                             "grid.n_cells = 200\n"
                             "side = sideways\n";
    const auto issues = issues_of(text);
    std::set<std::string> keys;
    for (const auto& i : issues) keys.insert(i.key);
    CHECK(keys.count("colour"));
    CHECK(keys.count("params.beta"));
    CHECK(keys.count("grid.n_cells"));
    CHECK(keys.count("side"));
    for (const auto& i : issues) CHECK(i.line > 0);

    // Semantic problems surface once the syntax is clean.
    std::string bad_times = kSmall;
    bad_times.replace(bad_times.find("output.count = 4"), 16, "output.times = 1, 3");
    CHECK_FALSE(issues_of(bad_times).empty());
    CHECK(issues_of(kSmall).empty());
}

TEST_CASE("tabulated initial data resolves relative to the config file") {
    const auto dir = scratch("tabulated");
    fs::create_directories(dir);
    std::string table = "S,h\n";
    for (int i = 0; i < 8; ++i) table += std::to_string(i + 0.5) + "," + std::to_string(i < 3 ? 0 : 1) + "\n";
    csv::write_file(dir / "book.csv", table);
    csv::write_file(dir / "tab.cfg", "grid.s_min = 0\ngrid.s_max = 8\ngrid.n_cells = 8\n"
                                     "initial.kind = tabulated\ninitial.file = book.csv\nt_end = 0.5\n");
    const auto cfg = load_config((dir / "tab.cfg").string());
    CHECK(cfg.name == "tab");
    const auto prep = prepare_scenario(cfg);
    CHECK(prep.initial.h == std::vector<double>{0, 0, 0, 1, 1, 1, 1, 1});
}

TEST_CASE("scenario runs are deterministic and fully listed") {
    const auto cfg = validate_config(kSmall);
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto ma = run_scenario(cfg, a.string());
    run_scenario(cfg, b.string());

    const auto files = listing(a);
    CHECK(files == listing(b));
    std::set<std::string> listed;
    for (const auto& f : ma.files) CHECK(listed.insert(f.path).second);
    CHECK(listed == files);
    CHECK(files.count("manifest.json"));
    CHECK(files.count("touch.csv"));
    CHECK(files.count("analysis.csv"));
    CHECK(files.count("snapshot_0003.csv"));

    for (const auto& name : files) {
        if (name == "manifest.json") continue;
        CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
        const std::string body = slurp(a / name);
        for (const char* bad : {"nan", "inf", "NaN", "Inf"}) CHECK(body.find(bad) == std::string::npos);
    }

    const auto snap = slurp(a / "snapshot_0000.csv");
    CHECK(snap.rfind("# t=", 0) == 0);
    CHECK(snap.find("\nS,h,p\n") != std::string::npos);
    CHECK(slurp(a / "touch.csv").rfind("t,S0,mass,peak_h\n", 0) == 0);

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["code_version"] == std::string(kCodeVersion));
    CHECK(manifest["grid"]["n_cells"] == 100);
    CHECK(manifest["files"].size() == files.size());
}

TEST_CASE("stale outputs from an earlier run are removed") {
    const auto dir = scratch("stale");
    fs::create_directories(dir);
    csv::write_file(dir / "snapshot_0042.csv", "old");
    csv::write_file(dir / "notes.txt", "keep me");
    std::string text = kSmall;
    text.replace(text.find("output.count = 4"), 16, "output.count = 2");
    const auto m = run_scenario(validate_config(text), dir.string());
    CHECK_FALSE(fs::exists(dir / "snapshot_0042.csv"));
    CHECK(fs::exists(dir / "notes.txt"));
    CHECK(m.files.size() == 5);
}

TEST_CASE("firm-stop scenario through the runner") {
    const auto dir = scratch("fig6");
    const auto cfg = load_config("fig6_limited");
    const auto m = run_scenario(cfg, dir.string());
    CHECK(m.status == "ok");
    const auto analysis = slurp(dir / "analysis.csv");
    CHECK(analysis.find("pressure_peak_at_touch,1,") != std::string::npos);
    CHECK(analysis.find("steady_distance_decreasing_last3,1,") != std::string::npos);
    // The touch stops at the wall, so no recovery exponent can be fitted.
    CHECK(analysis.find("touch_exponent,,") != std::string::npos);
    CHECK(analysis.find("final_touch,0,") != std::string::npos);
}

TEST_CASE("golden scenario stays below the shipped error threshold") {
    const auto dir = scratch("golden");
    run_scenario(load_config("barenblatt_golden"), dir.string());
    const auto analysis = slurp(dir / "analysis.csv");
    CHECK(analysis.find("exact_l1_within_threshold,1,") != std::string::npos);
}

TEST_CASE("similarity sweep outputs") {
    similarity::ShootingConfig cfg;
    const auto dir = scratch("sweep");
    const auto m = run_similarity_sweep({0.0, 0.5, 1.0, 2.0}, cfg, dir.string());
    CHECK(m.status == "ok");
    for (const char* f : {"similarity_gamma_0.csv", "similarity_gamma_0.5.csv", "similarity_gamma_1.csv",
                          "similarity_gamma_2.csv", "similarity_summary.csv", "manifest.json"}) {
        CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    std::istringstream summary(slurp(dir / "similarity_summary.csv"));
    std::string line;
    std::getline(summary, line);
    CHECK(line == "gamma,v_inf,s_peak,residual,status");
    int rows = 0;
    while (std::getline(summary, line)) {
        ++rows;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) > 0.0);
        CHECK(line.substr(line.rfind(',') + 1) == "ok");
    }
    CHECK(rows == 4);
    CHECK(slurp(dir / "similarity_gamma_1.csv").rfind("s,v,v_prime\n", 0) == 0);

    const auto empty = scratch("sweep_empty");
    CHECK(run_similarity_sweep({}, cfg, empty.string()).status == "ok");
    CHECK(slurp(empty / "similarity_summary.csv") == "gamma,v_inf,s_peak,residual,status\n");

    const auto neg = scratch("sweep_neg");
    CHECK(run_similarity_sweep({-1.0}, cfg, neg.string()).status == "partial");
    const auto text = slurp(neg / "similarity_summary.csv");
    CHECK(text.find("-1,,,,failed: no positive similarity solution") != std::string::npos);
}

TEST_CASE("sweep results come back in input order") {
    const auto sweep = solve_sweep({2.0, -1.0, 0.0, 1.0}, {});
    REQUIRE(sweep.size() == 4);
    CHECK(sweep[0].gamma == 2.0);
    CHECK(sweep[1].status.rfind("failed", 0) == 0);
    CHECK(sweep[2].profile);
    CHECK(sweep[3].profile->gamma == 1.0);
}

TEST_CASE("csv number formatting") {
    CHECK(csv::number(-0.0) == "0");
    CHECK(csv::number(0.1) == "0.10000000000000001");
    CHECK_THROWS_AS(csv::number(NAN), Error);
    CHECK_THROWS_AS(csv::number(INFINITY), Error);
    CHECK(csv::text("a,b\"c") == "a;b c");
}

TEST_CASE("command-line exit codes") {
    const auto dir = scratch("exe");
    fs::create_directories(dir);
    csv::write_file(dir / "bad.cfg", "grid.s_min = 0\nt_end = fast\n");
    csv::write_file(dir / "good.cfg", kSmall);
    CHECK(lobsim("validate " + (dir / "bad.cfg").string()) == 1);
    CHECK(lobsim("validate " + (dir / "good.cfg").string()) == 0);
    CHECK(lobsim("run " + (dir / "good.cfg").string() + " --quiet --out " + (dir / "run").string()) == 0);
    CHECK(fs::exists(dir / "run" / "manifest.json"));
    CHECK(lobsim("similarity --gamma 0,1 --quiet --out " + (dir / "sim").string()) == 0);
    CHECK(lobsim("similarity --gamma=-1 --quiet --out " + (dir / "neg").string()) == 2);
    CHECK(lobsim("similarity --gamma '' --quiet --out " + (dir / "none").string()) == 0);
    CHECK(lobsim("similarity --gamma x --quiet") == 1);
    CHECK(lobsim("frobnicate") != 0);
}
