#include "lob/config.hpp"

#include "lob/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace lob {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_unsigned(const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    return std::nullopt;
}

std::optional<std::vector<double>> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = parse_double(trim(item));
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

struct Parser {
    ScenarioConfig cfg;
    std::vector<ConfigIssue> issues;
    std::set<std::string> seen;
    std::map<std::string, std::size_t> lines;
    std::optional<std::vector<double>> output_times;
    std::optional<std::uint64_t> output_count;
    std::string touch_kind = "zero_flux";
    std::string deep_kind = "zero_flux";
    double touch_value = 0.0;
    double deep_value = 0.0;

    using Handler = std::function<std::optional<std::string>(const std::string&)>;
    std::map<std::string, Handler> handlers;

    void add_issue(std::size_t line, std::string key, std::string message) {
        issues.push_back({line, std::move(key), std::move(message)});
    }

    static Handler real(double& target, std::string what = "a number") {
        return [&target, what](const std::string& v) -> std::optional<std::string> {
            const auto d = parse_double(v);
            if (!d) return "expected " + what + ", got '" + v + "'";
            target = *d;
            return std::nullopt;
        };
    }
    static Handler flag(bool& target) {
        return [&target](const std::string& v) -> std::optional<std::string> {
            const auto b = parse_bool(v);
            if (!b) return "expected true or false, got '" + v + "'";
            target = *b;
            return std::nullopt;
        };
    }
    template <class E>
    static Handler choice(E& target, std::vector<std::pair<std::string, E>> options) {
        return [&target, options](const std::string& v) -> std::optional<std::string> {
            std::string allowed;
            for (const auto& [name, value] : options) {
                if (v == name) {
                    target = value;
                    return std::nullopt;
                }
                allowed += (allowed.empty() ? "" : "|") + name;
            }
            return "expected one of " + allowed + ", got '" + v + "'";
        };
    }

    Parser() {
        auto& c = cfg;
        handlers["scenario"] = [&c](const std::string& v) -> std::optional<std::string> {
            if (v.empty()) return "scenario name must not be empty";
            c.name = v;
            return std::nullopt;
        };
        handlers["grid.s_min"] = real(c.s_min);
        handlers["grid.s_max"] = real(c.s_max);
        handlers["grid.n_cells"] = [&c](const std::string& v) -> std::optional<std::string> {
            const auto n = parse_unsigned(v);
            if (!n) return "expected a positive integer, got '" + v + "'";
            c.n_cells = static_cast<std::size_t>(*n);
            return std::nullopt;
        };
        handlers["side"] = choice(c.side, {{"ask", Side::Ask}, {"bid", Side::Bid}});
        handlers["initial.kind"] = choice(c.initial.kind, {{"uniform_above_cutoff", InitialKind::UniformAboveCutoff},
                                                           {"steady", InitialKind::Steady},
                                                           {"parabolic_cap", InitialKind::ParabolicCap},
                                                           {"tabulated", InitialKind::Tabulated}});
        handlers["initial.depth"] = real(c.initial.depth);
        handlers["initial.cutoff"] = real(c.initial.cutoff);
        handlers["initial.extent"] = [&c](const std::string& v) -> std::optional<std::string> {
            const auto d = parse_double(v);
            if (!d) return "expected a number, got '" + v + "'";
            c.initial.extent = *d;
            return std::nullopt;
        };
        handlers["initial.a"] = real(c.initial.a);
        handlers["initial.s_b"] = real(c.initial.s_b);
        handlers["initial.c_mass"] = real(c.initial.c_mass);
        handlers["initial.t0"] = real(c.initial.t0);
        handlers["initial.center"] = real(c.initial.center);
        handlers["initial.file"] = [&c](const std::string& v) -> std::optional<std::string> {
            if (v.empty()) return "file name must not be empty";
            c.initial.file = v;
            return std::nullopt;
        };
        handlers["take_liquidity"] = real(c.take_liquidity);
        handlers["params.theta"] = real(c.params.theta);
        handlers["params.rho"] = real(c.params.rho);
        handlers["params.beta"] = real(c.params.beta);
        handlers["params.u0"] = real(c.params.u0);
        handlers["source.kind"] = choice(c.source.kind, {{"zero", SourceKind::Zero}, {"relaxation", SourceKind::Relaxation}});
        handlers["source.kappa"] = real(c.source.kappa);
        handlers["source.target"] = real(c.source.target);
        auto bc_kind = [](std::string& target, bool allow_stop) {
            return [&target, allow_stop](const std::string& v) -> std::optional<std::string> {
                static const std::set<std::string> kinds{"depth", "slope", "flux", "zero_flux", "firm_stop"};
                if (!kinds.count(v)) return "expected one of depth|slope|flux|zero_flux|firm_stop, got '" + v + "'";
                if (!allow_stop && v == "firm_stop") return "a firm stop is only valid on the touch side";
                target = v;
                return std::nullopt;
            };
        };
        handlers["bc.touch.kind"] = bc_kind(touch_kind, true);
        handlers["bc.touch.value"] = real(touch_value);
        handlers["bc.deep.kind"] = bc_kind(deep_kind, false);
        handlers["bc.deep.value"] = real(deep_value);
        handlers["solver.cfl_safety"] = real(c.solver.cfl_safety);
        handlers["solver.support_epsilon"] = real(c.solver.support_epsilon);
        handlers["solver.mode"] = choice(c.solver.mode, {{"full", SolverMode::Full}, {"source_only", SolverMode::SourceOnly}});
        handlers["solver.flux"] =
            choice(c.solver.flux, {{"canonical", FluxModel::Canonical}, {"microstructure", FluxModel::Microstructure}});
        handlers["solver.diagnostic_interval"] = real(c.solver.diagnostic_interval);
        handlers["t_end"] = real(c.solver.t_end);
        handlers["output.times"] = [this](const std::string& v) -> std::optional<std::string> {
            auto l = parse_list(v);
            if (!l) return "expected a comma-separated list of numbers, got '" + v + "'";
            output_times = std::move(*l);
            return std::nullopt;
        };
        handlers["output.count"] = [this](const std::string& v) -> std::optional<std::string> {
            const auto n = parse_unsigned(v);
            if (!n) return "expected a nonnegative integer, got '" + v + "'";
            output_count = *n;
            return std::nullopt;
        };
        handlers["output.dir"] = [&c](const std::string& v) -> std::optional<std::string> {
            if (v.empty()) return "output directory must not be empty";
            c.output_dir = v;
            return std::nullopt;
        };
        handlers["analysis.touch_exponent"] = flag(c.analysis.touch_exponent);
        handlers["analysis.height_exponent"] = flag(c.analysis.height_exponent);
        handlers["analysis.gamma"] = flag(c.analysis.gamma);
        handlers["analysis.steady_distance"] = flag(c.analysis.steady_distance);
        handlers["analysis.exact_error"] = flag(c.analysis.exact_error);
        handlers["analysis.window"] = [&c](const std::string& v) -> std::optional<std::string> {
            auto l = parse_list(v);
            if (!l || l->size() != 2) return "expected 't_lo, t_hi', got '" + v + "'";
            c.analysis.window = analysis::FitWindow{(*l)[0], (*l)[1]};
            return std::nullopt;
        };
        handlers["analysis.collapse_times"] = [&c](const std::string& v) -> std::optional<std::string> {
            auto l = parse_list(v);
            if (!l) return "expected a comma-separated list of times, got '" + v + "'";
            c.analysis.collapse_times = std::move(*l);
            return std::nullopt;
        };
        handlers["seed"] = [&c](const std::string& v) -> std::optional<std::string> {
            const auto n = parse_unsigned(v);
            if (!n) return "expected a nonnegative integer, got '" + v + "'";
            c.seed = *n;
            return std::nullopt;
        };
    }

    void parse(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
            const std::string line = trim(raw);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                add_issue(line_no, "", "expected 'key = value', got '" + line + "'");
                continue;
            }
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) {
                add_issue(line_no, "", "missing key before '='");
                continue;
            }
            const auto h = handlers.find(key);
            if (h == handlers.end()) {
                add_issue(line_no, key, "unknown key '" + key + "'");
                continue;
            }
            if (seen.count(key)) {
                add_issue(line_no, key, "duplicate key '" + key + "' (first set on line " + std::to_string(lines[key]) + ")");
                continue;
            }
            seen.insert(key);
            lines[key] = line_no;
            cfg.echo.emplace_back(key, value);
            if (auto err = h->second(value)) add_issue(line_no, key, *err);
        }
    }

    void require(const std::string& key, const std::string& why = "") {
        if (!seen.count(key)) add_issue(0, key, "missing required key '" + key + "'" + (why.empty() ? "" : " " + why));
    }

    // Present and free of parse errors.
    bool parsed(const std::string& key) const {
        if (!seen.count(key)) return false;
        return std::none_of(issues.begin(), issues.end(), [&](const ConfigIssue& i) { return i.key == key; });
    }

    std::size_t line_of(const std::string& key) const {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    }

    void check_semantics() {
        auto& c = cfg;
        auto guard = [&](const std::string& key, const std::function<void()>& fn) {
            try {
                fn();
            } catch (const std::exception& e) {
                add_issue(line_of(key), key, e.what());
            }
        };
        guard("grid.n_cells", [&] { (void)c.grid(); });
        if (c.take_liquidity < 0.0) add_issue(line_of("take_liquidity"), "take_liquidity", "must be nonnegative");
        guard("params", [&] { c.params.validate(); });
        if (c.source.kind == SourceKind::Relaxation) {
            if (!(c.source.kappa > 0.0)) add_issue(line_of("source.kappa"), "source.kappa", "relaxation needs kappa > 0");
            if (c.source.target < 0.0) add_issue(line_of("source.target"), "source.target", "target depth must be nonnegative");
        }
        switch (c.initial.kind) {
            case InitialKind::UniformAboveCutoff:
                if (c.initial.depth < 0.0) add_issue(line_of("initial.depth"), "initial.depth", "must be nonnegative");
                if (c.initial.extent && !(*c.initial.extent > 0.0)) {
                    add_issue(line_of("initial.extent"), "initial.extent", "must be positive");
                }
                break;
            case InitialKind::Steady:
                if (c.initial.a < 0.0) add_issue(line_of("initial.a"), "initial.a", "must be nonnegative");
                break;
            case InitialKind::ParabolicCap:
                if (!(c.initial.c_mass > 0.0)) add_issue(line_of("initial.c_mass"), "initial.c_mass", "must be positive");
                if (!(c.initial.t0 > 0.0)) add_issue(line_of("initial.t0"), "initial.t0", "must be positive");
                break;
            case InitialKind::Tabulated: break;
        }

        auto make_bc = [](const std::string& kind, double value, BcLocation loc) {
            if (kind == "depth") return BoundaryCondition::depth(value, loc);
            if (kind == "slope") return BoundaryCondition::slope(value, loc);
            if (kind == "flux") return BoundaryCondition::flux(value, loc);
            if (kind == "firm_stop") return BoundaryCondition::firm_stop(value);
            return BoundaryCondition::zero_flux(loc);
        };
        c.bc.touch = make_bc(touch_kind, touch_value, BcLocation::TouchSide);
        c.bc.deep = make_bc(deep_kind, deep_value, BcLocation::DeepSide);
        if (touch_kind != "zero_flux") require("bc.touch.value", "for bc.touch.kind = " + touch_kind);
        if (deep_kind != "zero_flux") require("bc.deep.value", "for bc.deep.kind = " + deep_kind);
        guard("bc.touch.kind", [&] { c.bc.validate(c.grid(), c.side); });

        const double t_start = c.initial.kind == InitialKind::ParabolicCap ? c.initial.t0 : 0.0;
        if (output_times) {
            c.solver.output_times = *output_times;
        } else {
            const std::size_t count = output_count ? static_cast<std::size_t>(*output_count) : 10;
            c.solver.output_times.clear();
            for (std::size_t k = 1; k <= count; ++k) {
                c.solver.output_times.push_back(t_start + (c.solver.t_end - t_start) * static_cast<double>(k) /
                                                              static_cast<double>(count));
            }
        }
        guard("t_end", [&] { c.solver.validate(t_start); });
        for (double t : c.analysis.collapse_times) {
            const bool found = std::any_of(c.solver.output_times.begin(), c.solver.output_times.end(),
                                           [t](double o) { return std::abs(o - t) <= 1e-9 * std::max(1.0, std::abs(t)); });
            if (!found) {
                add_issue(line_of("analysis.collapse_times"), "analysis.collapse_times",
                          "collapse time " + std::to_string(t) + " is not an output time");
            }
        }
        if (!c.analysis.collapse_times.empty() && c.analysis.collapse_times.size() < 3) {
            add_issue(line_of("analysis.collapse_times"), "analysis.collapse_times", "collapse needs at least 3 times");
        }
        if (c.analysis.window && !(c.analysis.window->t_lo < c.analysis.window->t_hi)) {
            add_issue(line_of("analysis.window"), "analysis.window", "window needs t_lo < t_hi");
        }
        if (c.analysis.exact_error && c.initial.kind != InitialKind::ParabolicCap) {
            add_issue(line_of("analysis.exact_error"), "analysis.exact_error", "only available for parabolic_cap scenarios");
        }
    }
};

}  // namespace

ScenarioConfig validate_config(std::string_view text, std::string_view default_name) {
    Parser p;
    p.cfg.name = std::string(default_name);
    p.parse(text);
    for (const char* key : {"grid.s_min", "grid.s_max", "grid.n_cells", "initial.kind", "t_end"}) p.require(key);
    if (p.parsed("initial.kind")) {
        switch (p.cfg.initial.kind) {
            case InitialKind::UniformAboveCutoff:
                p.require("initial.depth", "for uniform_above_cutoff");
                p.require("initial.cutoff", "for uniform_above_cutoff");
                break;
            case InitialKind::Steady:
                p.require("initial.a", "for steady");
                p.require("initial.s_b", "for steady");
                break;
            case InitialKind::ParabolicCap:
                p.require("initial.c_mass", "for parabolic_cap");
                p.require("initial.t0", "for parabolic_cap");
                p.require("initial.center", "for parabolic_cap");
                break;
            case InitialKind::Tabulated: p.require("initial.file", "for tabulated"); break;
        }
    }
    if (p.parsed("source.kind") && p.cfg.source.kind == SourceKind::Relaxation) p.require("source.kappa", "for relaxation");
    if (p.seen.count("output.times") && p.seen.count("output.count")) {
        p.add_issue(p.line_of("output.count"), "output.count", "give either output.times or output.count, not both");
    }
    if (p.issues.empty()) p.check_semantics();
    if (!p.issues.empty()) throw ConfigError(std::move(p.issues));
    if (p.cfg.output_dir.empty()) p.cfg.output_dir = "out/" + p.cfg.name;
    return p.cfg;
}

ScenarioConfig load_config(const std::string& source) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(source)) {
        std::ifstream in(source, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        auto cfg = validate_config(ss.str(), fs::path(source).stem().string());
        cfg.base_dir = fs::path(source).parent_path().string();
        return cfg;
    }
    std::string name = source;
    if (!name.ends_with(".cfg")) name += ".cfg";
    if (const auto text = builtin_file(name)) return validate_config(*text, name.substr(0, name.size() - 4));
    throw ConfigError({{0, "", "no config file or built-in scenario named '" + source + "'"}});
}

}  // namespace lob
