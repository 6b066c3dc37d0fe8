#pragma once

#include "lob/config.hpp"
#include "lob/pde.hpp"
#include "lob/similarity.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lob {

inline constexpr std::string_view kCodeVersion = "lobsim 1.0.0";

/// Solver inputs built from a config.
struct PreparedScenario {
    BookProfile initial;
    PhysicalParams params;
    BoundaryPair bc;
    SolverConfig solver;
    /// Time and touch the scaling fits measure from. For recovery scenarios this is the moment of
    /// the liquidity-taking order; for a parabolic cap it is the cap's point-source origin (t = 0).
    double t_origin = 0.0;
    std::optional<double> touch_origin;
    std::vector<ExecutedLevel> executed;
};

PreparedScenario prepare_scenario(const ScenarioConfig& cfg);

struct AnalysisRow {
    std::string metric;
    std::optional<double> value;  ///< empty when the metric could not be computed
    std::string note;
};

std::vector<AnalysisRow> analyse(const ScenarioConfig& cfg, const Trajectory& traj);

struct ScenarioOutcome {
    Trajectory trajectory;
    std::vector<AnalysisRow> analysis{};
    double wall_seconds = 0.0;
};

/// Runs the solver and the requested analyses without touching the filesystem.
ScenarioOutcome simulate(const ScenarioConfig& cfg);

struct EmittedFile {
    std::string path;  ///< relative to the output directory
    std::string role;
};

struct RunManifest {
    std::string name;
    std::string status = "ok";
    std::string output_dir;
    std::string code_version{kCodeVersion};
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::optional<PriceGrid> grid;
    double cfl_safety = 0.0;
    std::size_t steps = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
    double wall_clock_seconds = 0.0;
    std::vector<EmittedFile> files;
};

std::string manifest_json(const RunManifest& manifest);

/// Runs a scenario and writes snapshot_NNNN.csv, touch.csv, analysis.csv and manifest.json into
/// `output_dir` (or the config's own directory). Stale files from an earlier run of the same kind
/// are removed first so the manifest matches the directory. A numerical blow-up still writes the
/// partial outputs and then rethrows.
RunManifest run_scenario(const ScenarioConfig& cfg, std::optional<std::string> output_dir = std::nullopt);

struct SweepEntry {
    double gamma = 0.0;
    std::optional<similarity::SimilarityProfile> profile;
    std::string status;  ///< "ok" or "failed: <reason>"
};

/// Solves every gamma concurrently; results come back in input order.
std::vector<SweepEntry> solve_sweep(const std::vector<double>& gammas, const similarity::ShootingConfig& cfg);

/// Writes similarity_gamma_<g>.csv per solved gamma, similarity_summary.csv and manifest.json.
RunManifest run_similarity_sweep(const std::vector<double>& gammas, const similarity::ShootingConfig& cfg,
                                 const std::string& output_dir);

}  // namespace lob
