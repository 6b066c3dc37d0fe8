// lobsim: command-line front end for the order-book recovery simulator.
//
//   lobsim run <config|builtin> [--out DIR] [--quiet]
//   lobsim similarity --gamma 0,0.5,1,2 [--s-max X] [--v-inf X] [--out DIR] [--quiet]
//   lobsim validate <config|builtin>
//   lobsim golden [--out DIR] [--quiet]
//
// Exit codes: 0 success, 1 invalid input or failed acceptance check, 2 numerical failure.

#include "CLI11.hpp"

#include "lob/acceptance.hpp"
#include "lob/config.hpp"
#include "lob/csv.hpp"
#include "lob/errors.hpp"
#include "lob/scenario.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kNumerical = 2;

void print_issues(const lob::ConfigError& e) {
    for (const auto& issue : e.issues()) {
        std::cerr << "  ";
        if (issue.line > 0) std::cerr << "line " << issue.line << ": ";
        if (!issue.key.empty()) std::cerr << issue.key << ": ";
        std::cerr << issue.message << '\n';
    }
}

// Comma-separated numbers; an empty string is an empty list.
std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        const std::string token = item.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) throw lob::RangeError("not a number in --gamma: '" + token + "'");
        values.push_back(v);
    }
    return values;
}

int cmd_run(const std::string& source, const std::optional<std::string>& out, bool quiet) {
    const auto cfg = lob::load_config(source);
    const auto manifest = lob::run_scenario(cfg, out);
    if (!quiet) {
        std::cout << "scenario " << manifest.name << ": " << manifest.steps << " steps in " << manifest.wall_clock_seconds
                  << " s, " << manifest.files.size() << " files in " << manifest.output_dir << '\n';
        const auto analysis = std::filesystem::path(manifest.output_dir) / "analysis.csv";
        std::cout << "see " << analysis.string() << " for the analysis table\n";
    }
    return kOk;
}

int cmd_similarity(const std::vector<double>& gammas, const lob::similarity::ShootingConfig& cfg,
                   const std::string& out, bool quiet) {
    cfg.validate();
    const auto manifest = lob::run_similarity_sweep(gammas, cfg, out);
    if (!quiet) {
        std::cout << "solved " << gammas.size() << " gamma value(s), status " << manifest.status << ", output in "
                  << manifest.output_dir << '\n';
    }
    return manifest.status == "ok" ? kOk : kNumerical;
}

int cmd_validate(const std::string& source) {
    const auto cfg = lob::load_config(source);
    std::cout << cfg.name << ": ok (" << cfg.n_cells << " cells, t_end " << cfg.solver.t_end << ", "
              << cfg.solver.output_times.size() << " output times)\n";
    return kOk;
}

int cmd_golden(const std::optional<std::string>& out, bool quiet) {
    const auto results = lob::run_acceptance(quiet ? nullptr : &std::cout);
    bool all = true;
    std::string table = "id,title,pass,seconds,detail\n";
    for (const auto& r : results) {
        all = all && r.pass;
        table += std::to_string(r.id) + ',' + lob::csv::text(r.title) + ',' + (r.pass ? "1" : "0") + ',' +
                 lob::csv::number(r.seconds) + ',' + lob::csv::text(r.detail) + '\n';
    }
    if (out) {
        std::filesystem::create_directories(*out);
        lob::csv::write_file(std::filesystem::path(*out) / "acceptance.csv", table);
    }
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.pass ? 1 : 0;
    if (!quiet) std::cout << passed << '/' << results.size() << " checks passed\n";
    return all ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-book recovery simulator"};
    app.require_subcommand(1);

    bool quiet = false;
    std::optional<std::string> out;
    app.add_flag("-q,--quiet", quiet, "Suppress progress output")->configurable(false);
    app.add_option("-o,--out", out, "Output directory");

    std::string run_source;
    auto* run = app.add_subcommand("run", "Run a scenario config (path or built-in name)");
    run->add_option("config", run_source, "Config file or built-in scenario name")->required();
    run->fallthrough();

    std::string gamma_list;
    lob::similarity::ShootingConfig shoot;
    auto* sim = app.add_subcommand("similarity", "Solve the similarity profile for a list of touch speeds");
    sim->add_option("--gamma", gamma_list, "Comma-separated touch speeds (may be empty)")->required();
    sim->add_option("--s-max", shoot.s_max, "Outer end of the profile grid");
    sim->add_option("--v-inf", shoot.v_inf, "Deep-book amplitude");
    sim->add_option("--points", shoot.n_points, "Number of profile nodes");
    sim->fallthrough();

    std::string validate_source;
    auto* val = app.add_subcommand("validate", "Check a config and report every problem found");
    val->add_option("config", validate_source, "Config file or built-in scenario name")->required();

    auto* golden = app.add_subcommand("golden", "Run the end-to-end acceptance checks");
    golden->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_source, out, quiet);
        if (*sim) return cmd_similarity(parse_list(gamma_list), shoot, out.value_or("out/similarity"), quiet);
        if (*val) return cmd_validate(validate_source);
        if (*golden) return cmd_golden(out, quiet);
    } catch (const lob::ConfigError& e) {
        std::cerr << "invalid config: " << e.issues().size() << " problem(s)\n";
        print_issues(e);
        return kInvalid;
    } catch (const lob::NumericalBlowupError& e) {
        std::cerr << "numerical failure: " << e.what() << " (partial outputs kept)\n";
        return kNumerical;
    } catch (const lob::RangeError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const lob::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kInvalid;
}
