#include "lob/core.hpp"

#include "lob/errors.hpp"
#include "lob/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lob {

NumericalBlowupError::NumericalBlowupError(std::size_t cell, double time,
                                           std::shared_ptr<const Trajectory> partial)
    : Error("numerical blowup: non-finite depth in cell " + std::to_string(cell) + " at t=" +
            std::to_string(time)),
      cell_(cell),
      time_(time),
      partial_(std::move(partial)) {}

namespace {
std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::string msg = "invalid config (" + std::to_string(issues.size()) + " issue(s))";
    for (const auto& issue : issues) {
        msg += "\n  ";
        if (issue.line > 0) msg += "line " + std::to_string(issue.line) + ": ";
        if (!issue.key.empty()) msg += issue.key + ": ";
        msg += issue.message;
    }
    return msg;
}
}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

PriceGrid::PriceGrid(double s_min, double s_max, std::size_t n_cells)
    : s_min_(s_min), s_max_(s_max), n_cells_(n_cells), dx_((s_max - s_min) / static_cast<double>(n_cells)) {
    if (!std::isfinite(s_min) || !std::isfinite(s_max) || !(s_max > s_min)) {
        throw RangeError("price grid needs finite s_min < s_max");
    }
    if (n_cells < 4) {
        throw RangeError("price grid needs at least 4 cells, got " + std::to_string(n_cells));
    }
}

std::vector<double> PriceGrid::centers() const {
    std::vector<double> out(n_cells_);
    for (std::size_t i = 0; i < n_cells_; ++i) out[i] = center(i);
    return out;
}

std::string_view to_string(Side side) { return side == Side::Bid ? "bid" : "ask"; }

BookProfile BookProfile::zeros(const PriceGrid& grid, Side side, double t) {
    return BookProfile{grid, side, std::vector<double>(grid.n_cells(), 0.0), t};
}

BookProfile BookProfile::from_function(const PriceGrid& grid, const std::function<double(double)>& depth,
                                       Side side, double t) {
    BookProfile p = zeros(grid, side, t);
    for (std::size_t i = 0; i < grid.n_cells(); ++i) p.h[i] = depth(grid.center(i));
    return p;
}

void BookProfile::validate() const {
    if (h.size() != grid.n_cells()) {
        throw RangeError("book profile has " + std::to_string(h.size()) + " values for " +
                         std::to_string(grid.n_cells()) + " cells");
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!std::isfinite(h[i]) || h[i] < 0.0) {
            throw RangeError("book profile depth at cell " + std::to_string(i) + " is not a finite nonnegative value");
        }
    }
}

double BookProfile::max_depth() const { return h.empty() ? 0.0 : *std::max_element(h.begin(), h.end()); }

std::size_t BookProfile::argmax() const {
    return static_cast<std::size_t>(std::distance(h.begin(), std::max_element(h.begin(), h.end())));
}

BookProfile mirror(const BookProfile& profile) {
    PriceGrid g(-profile.grid.s_max(), -profile.grid.s_min(), profile.grid.n_cells());
    BookProfile out{g, profile.side == Side::Bid ? Side::Ask : Side::Bid, profile.h, profile.t};
    std::reverse(out.h.begin(), out.h.end());
    return out;
}

SourceTerm SourceTerm::tabulated(std::vector<double> rates) { return SourceTerm{Tabulated{std::move(rates)}}; }

SourceTerm SourceTerm::relaxation(double kappa, std::vector<double> target) {
    if (!(kappa >= 0.0)) throw RangeError("relaxation rate must be nonnegative");
    return SourceTerm{Relaxation{kappa, std::move(target)}};
}

SourceTerm SourceTerm::relaxation(double kappa, double target) {
    return relaxation(kappa, std::vector<double>{target});
}

SourceTerm SourceTerm::function(std::function<double(double, double)> rate) {
    return SourceTerm{Function{std::move(rate)}};
}

double SourceTerm::rate(std::size_t cell, double price, double t, double depth) const {
    return std::visit(
        [&](const auto& src) -> double {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                return cell < src.rates.size() ? src.rates[cell] : 0.0;
            } else if constexpr (std::is_same_v<T, Relaxation>) {
                const double target = src.target.size() == 1 ? src.target.front()
                                      : cell < src.target.size() ? src.target[cell]
                                                                 : 0.0;
                return src.kappa * (target - depth);
            } else {
                return src.rate(price, t);
            }
        },
        impl_);
}

double SourceTerm::stiffness() const noexcept {
    if (const auto* r = std::get_if<Relaxation>(&impl_)) return r->kappa;
    return 0.0;
}

SourceTerm SourceTerm::mirrored(std::size_t n_cells) const {
    return std::visit(
        [&](const auto& src) -> SourceTerm {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return SourceTerm{};
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                auto r = src.rates;
                r.resize(n_cells, 0.0);
                std::reverse(r.begin(), r.end());
                return SourceTerm{Tabulated{std::move(r)}};
            } else if constexpr (std::is_same_v<T, Relaxation>) {
                auto target = src.target;
                if (target.size() > 1) {
                    target.resize(n_cells, 0.0);
                    std::reverse(target.begin(), target.end());
                }
                return SourceTerm{Relaxation{src.kappa, std::move(target)}};
            } else {
                auto f = src.rate;
                return SourceTerm{Function{[f](double s, double t) { return f(-s, t); }}};
            }
        },
        impl_);
}

void PhysicalParams::validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw RangeError("theta must be positive");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw RangeError("rho must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw RangeError("beta must be positive");
    if (!std::isfinite(u0)) throw RangeError("u0 must be finite");
}

double volume(const BookProfile& profile, double s1, double s2) {
    const auto& g = profile.grid;
    const double tol = 1e-12 * (std::abs(g.s_min()) + std::abs(g.s_max()) + g.dx());
    if (!(s1 < s2)) throw RangeError("volume needs s1 < s2");
    if (s1 < g.s_min() - tol || s2 > g.s_max() + tol) {
        throw RangeError("volume interval [" + std::to_string(s1) + ", " + std::to_string(s2) +
                         "] leaves the grid");
    }
    s1 = std::max(s1, g.s_min());
    s2 = std::min(s2, g.s_max());
    const double dx = g.dx();
    const auto first = static_cast<std::size_t>(std::clamp(std::floor((s1 - g.s_min()) / dx), 0.0,
                                                           static_cast<double>(g.n_cells() - 1)));
    double sum = 0.0;
    for (std::size_t i = first; i < g.n_cells(); ++i) {
        const double lo = std::max(s1, g.edge(i));
        const double hi = std::min(s2, g.edge(i + 1));
        if (lo >= s2) break;
        if (hi > lo) sum += profile.h[i] * (hi - lo);
    }
    return sum;
}

double total_mass(const BookProfile& profile) {
    double sum = 0.0;
    for (double v : profile.h) sum += v;
    return sum * profile.grid.dx();
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw RangeError("linf_distance: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double l1_distance(std::span<const double> a, std::span<const double> b, double dx) {
    if (a.size() != b.size()) throw RangeError("l1_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s * dx;
}

}  // namespace lob
