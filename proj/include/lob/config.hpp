#pragma once

#include "lob/analysis.hpp"
#include "lob/core.hpp"
#include "lob/pde.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lob {

/// Text of a file compiled in from the repository's configs/ directory, e.g. "fig5_unlimited.cfg".
std::optional<std::string_view> builtin_file(std::string_view name);
/// Names of the compiled-in scenarios (file names without ".cfg").
std::vector<std::string> builtin_scenarios();

enum class InitialKind { UniformAboveCutoff, Steady, ParabolicCap, Tabulated };

struct InitialSpec {
    InitialKind kind = InitialKind::UniformAboveCutoff;
    // uniform_above_cutoff: `depth` from `cutoff` for `extent` (to the end of the grid when absent)
    double depth = 1.0;
    double cutoff = 0.0;
    std::optional<double> extent;
    // steady: a sqrt(s_b - S) starting at the grid's touch-side edge
    double a = 1.0;
    double s_b = 0.0;
    // parabolic_cap: closed form at time t0 around `center`
    double c_mass = 1.0;
    double t0 = 1.0;
    double center = 0.0;
    // tabulated: one depth per cell, read from a CSV (first column S, second h) or one value per line
    std::string file;
};

enum class SourceKind { Zero, Relaxation };

struct SourceSpec {
    SourceKind kind = SourceKind::Zero;
    double kappa = 0.0;
    double target = 0.0;
};

struct AnalysisRequest {
    bool touch_exponent = false;
    bool height_exponent = false;
    bool gamma = false;
    bool steady_distance = false;
    /// L1 distance to the closed-form cap at every snapshot (parabolic_cap scenarios only).
    bool exact_error = false;
    std::optional<analysis::FitWindow> window;
    std::vector<double> collapse_times;
};

struct ScenarioConfig {
    std::string name;
    double s_min = 0.0;
    double s_max = 1.0;
    std::size_t n_cells = 4;
    Side side = Side::Ask;
    InitialSpec initial;
    /// Quantity removed from the touch side before the run starts.
    double take_liquidity = 0.0;
    PhysicalParams params;
    SourceSpec source;
    BoundaryPair bc;
    SolverConfig solver;
    std::string output_dir;
    /// Reserved; every run is deterministic.
    std::optional<std::uint64_t> seed;
    /// Directory relative paths (tabulated initial data) are resolved against.
    std::string base_dir;
    AnalysisRequest analysis;
    /// Every key/value pair as written, in file order.
    std::vector<std::pair<std::string, std::string>> echo;

    PriceGrid grid() const { return PriceGrid(s_min, s_max, n_cells); }
};

/// Parses the flat `key = value` format (`#` comments, dotted keys). Collects every problem
/// (unknown keys, malformed values, missing required keys, inconsistent values) and throws
/// ConfigError carrying all of them.
ScenarioConfig validate_config(std::string_view text, std::string_view default_name = "scenario");

/// Loads a config from a path, or from the compiled-in set when `source` names a built-in scenario.
ScenarioConfig load_config(const std::string& source);

}  // namespace lob
