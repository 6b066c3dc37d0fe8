#include "lob/analysis.hpp"

#include "lob/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lob::analysis {

namespace {

constexpr std::size_t kMinSamples = 8;

// Advancing displacement is positive: toward lower prices on the ask side, higher on the bid side.
double advance(Side side, double from, double to) { return side == Side::Ask ? from - to : to - from; }

struct Peak {
    double position = 0.0;
    double height = 0.0;
};

// Vertex of the parabola through the argmax cell and its neighbours.
Peak refined_peak(const BookProfile& p) {
    const std::size_t k = p.argmax();
    const double dx = p.grid.dx();
    Peak out{p.grid.center(k), p.h[k]};
    if (k == 0 || k + 1 >= p.h.size()) return out;
    const double l = p.h[k - 1], c = p.h[k], r = p.h[k + 1];
    const double curv = l - 2.0 * c + r;
    if (!(curv < 0.0)) return out;
    const double off = 0.5 * (l - r) / curv;
    out.position += off * dx;
    out.height = c - 0.25 * (l - r) * off;
    return out;
}

double interpolate(const std::vector<std::pair<double, double>>& pts, double s) {
    if (pts.empty()) return 0.0;
    if (s <= pts.front().first) return pts.front().second;
    if (s >= pts.back().first) return pts.back().second;
    const auto it = std::lower_bound(pts.begin(), pts.end(), s,
                                     [](const std::pair<double, double>& a, double x) { return a.first < x; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (s - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
}

// Least-squares slope through the origin of y against x = tau^(1/3).
double cube_root_coefficient(const std::vector<double>& tau, const std::vector<double>& y) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double x = std::cbrt(tau[i]);
        num += x * y[i];
        den += x * x;
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace

FitWindow default_window(const Trajectory& traj) {
    double t_end = traj.t_origin;
    for (const auto& p : traj.touch_series) t_end = std::max(t_end, p.t);
    for (const auto& p : traj.peak_series) t_end = std::max(t_end, p.t);
    return {traj.t_origin + 0.2 * (t_end - traj.t_origin), t_end};
}

ScalingFit fit_power_law(const std::vector<TimedValue>& series, double t_origin, FitWindow window) {
    if (!(window.t_lo < window.t_hi)) throw UnfittableError("fit window needs t_lo < t_hi");
    std::vector<double> xs, ys;
    for (const auto& p : series) {
        if (p.t < window.t_lo || p.t > window.t_hi || !(p.t > t_origin)) continue;
        if (!(p.value > 0.0)) {
            throw UnfittableError("nonpositive value " + std::to_string(p.value) + " at t=" + std::to_string(p.t));
        }
        xs.push_back(std::log(p.t - t_origin));
        ys.push_back(std::log(p.value));
    }
    if (xs.size() < kMinSamples) {
        throw UnfittableError("only " + std::to_string(xs.size()) + " samples in window [" +
                              std::to_string(window.t_lo) + ", " + std::to_string(window.t_hi) + "], need " +
                              std::to_string(kMinSamples));
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw UnfittableError("all samples share one time");
    ScalingFit fit;
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.prefactor = std::exp(intercept);
    fit.window = window;
    fit.samples = xs.size();
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + fit.exponent * xs[i]);
        fit.residuals.push_back(r);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : (ss_res <= 1e-24 ? 1.0 : 0.0);
    return fit;
}

ScalingFit fit_touch_exponent(const Trajectory& traj, FitWindow window) {
    if (!traj.touch_origin) throw UnfittableError("trajectory has no touch at its origin");
    const double origin = *traj.touch_origin;
    const double dx = traj.grid.dx();
    std::vector<TimedValue> disp;
    for (const auto& p : traj.touch_series) {
        if (p.t < window.t_lo || p.t > window.t_hi || !(p.t > traj.t_origin)) continue;
        disp.push_back({p.t, advance(traj.side, origin, p.value)});
    }
    if (disp.size() < kMinSamples) {
        throw UnfittableError("only " + std::to_string(disp.size()) + " touch samples in window, need " +
                              std::to_string(kMinSamples));
    }
    const double moved = disp.back().value - disp.front().value;
    if (std::abs(moved) < dx) {
        throw UnfittableError("touch stationary in window: moved " + std::to_string(moved) + " < dx " +
                              std::to_string(dx));
    }
    const double dir = moved > 0.0 ? 1.0 : -1.0;
    double best = disp.front().value * dir;
    for (const auto& p : disp) {
        if (p.value * dir < best - 0.5 * dx) {
            throw UnfittableError("touch displacement not monotone: reverses at t=" + std::to_string(p.t));
        }
        best = std::max(best, p.value * dir);
    }
    for (auto& p : disp) p.value = std::abs(p.value);
    return fit_power_law(disp, traj.t_origin, window);
}

ScalingFit fit_height_exponent(const Trajectory& traj, FitWindow window) {
    return fit_power_law(traj.peak_series, traj.t_origin, window);
}

CollapseReport collapse(const Trajectory& traj, const std::vector<double>& times) {
    if (times.size() < 3) throw RangeError("collapse needs at least 3 times");
    CollapseReport rep;
    rep.times = times;
    std::vector<std::vector<std::pair<double, double>>> rescaled;
    double s_cap = 4.0;
    for (double t : times) {
        const BookProfile& snap = traj.snapshot_at(t);
        const auto touch = find_touch(snap);
        if (!touch) throw UnfittableError("empty snapshot at t=" + std::to_string(t));
        const Peak peak = refined_peak(snap);
        const double offset = advance(snap.side, peak.position, *touch);
        if (!(offset > 0.0) || !(peak.height > 0.0)) {
            throw UnfittableError("peak coincides with the touch at t=" + std::to_string(t));
        }
        std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
        for (std::size_t i = 0; i < snap.h.size(); ++i) {
            const double s = advance(snap.side, snap.grid.center(i), *touch) / offset;
            if (s > 0.0) pts.emplace_back(s, snap.h[i] / peak.height);
        }
        std::sort(pts.begin(), pts.end());
        s_cap = std::min(s_cap, pts.back().first);
        rescaled.push_back(std::move(pts));
    }
    const std::size_t m = 401;
    for (std::size_t j = 0; j < m; ++j) rep.s_grid.push_back(s_cap * static_cast<double>(j) / (m - 1));
    for (const auto& pts : rescaled) {
        std::vector<double> row;
        row.reserve(m);
        for (double s : rep.s_grid) row.push_back(interpolate(pts, s));
        rep.profiles.push_back(std::move(row));
    }
    const std::size_t k = times.size();
    rep.distances.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            double diff = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double x = rep.profiles[a][j], y = rep.profiles[b][j];
                diff += (x - y) * (x - y);
                na += x * x;
                nb += y * y;
            }
            const double norm = std::max(na, nb);
            const double d = norm > 0.0 ? std::sqrt(diff / norm) : 0.0;
            rep.distances[a][b] = rep.distances[b][a] = d;
            rep.max_distance = std::max(rep.max_distance, d);
        }
    }
    return rep;
}

std::string_view to_string(GammaStatus status) {
    switch (status) {
        case GammaStatus::Advancing: return "advancing";
        case GammaStatus::Stationary: return "stationary";
        case GammaStatus::Retreating: return "retreating";
        case GammaStatus::CapLimit: return "cap_limit";
    }
    return "unknown";
}

double touch_to_peak_ratio(double gamma, const similarity::ShootingConfig& reference) {
    similarity::ShootingConfig cfg = reference;
    cfg.v_inf = 1.0;
    // The profile must reach its tail well inside the grid; the cap part extends to about 2 gamma.
    cfg.s_max = std::max(cfg.s_max, 25.0 * (1.0 + gamma));
    const auto p = similarity::solve_similarity(gamma, cfg);
    return gamma / p.s_peak;
}

GammaEstimate estimate_gamma(const Trajectory& traj, FitWindow window, const similarity::ShootingConfig& reference) {
    if (!traj.touch_origin) throw UnfittableError("trajectory has no touch at its origin");
    if (!(window.t_lo < window.t_hi)) throw UnfittableError("fit window needs t_lo < t_hi");
    const double origin = *traj.touch_origin;
    const double dx = traj.grid.dx();

    std::vector<double> tau, disp, offset;
    const std::size_t n = std::min(traj.touch_series.size(), traj.peak_position_series.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& touch = traj.touch_series[i];
        const auto& peak = traj.peak_position_series[i];
        if (touch.t < window.t_lo || touch.t > window.t_hi || !(touch.t > traj.t_origin)) continue;
        if (std::abs(peak.t - touch.t) > 1e-12 * std::max(1.0, std::abs(touch.t))) {
            throw UnfittableError("touch and peak series are not aligned in time");
        }
        tau.push_back(touch.t - traj.t_origin);
        disp.push_back(advance(traj.side, origin, touch.value));
        offset.push_back(advance(traj.side, peak.value, touch.value));
    }
    if (tau.size() < kMinSamples) {
        throw UnfittableError("only " + std::to_string(tau.size()) + " samples in window, need " +
                              std::to_string(kMinSamples));
    }

    GammaEstimate est;
    est.touch_speed = cube_root_coefficient(tau, disp);
    est.peak_scale = cube_root_coefficient(tau, offset);
    if (!(est.peak_scale > 0.0)) throw UnfittableError("peak does not separate from the touch");
    est.ratio = est.touch_speed / est.peak_scale;

    const double spread = *std::max_element(disp.begin(), disp.end()) - *std::min_element(disp.begin(), disp.end());
    if (spread < dx && std::abs(disp.back()) < dx) {
        est.status = GammaStatus::Stationary;
        est.gamma = 0.0;
        return est;
    }

    // Every member of the family peaks beyond gamma (at the peak the first integral reads
    // (s - gamma) v = v_inf > 0), so the ratio stays below one. It is within 0.3% of one already
    // at gamma = 16, where resolving it would need far larger and slower reference solves.
    const double target = std::abs(est.ratio);
    constexpr double kGammaCap = 16.0;
    double hi = 1.0;
    if (target < 1.0) {
        while (touch_to_peak_ratio(hi, reference) < target && hi < kGammaCap) hi *= 2.0;
    }
    if (target >= 1.0 || touch_to_peak_ratio(hi, reference) < target) {
        est.status = GammaStatus::CapLimit;
        est.gamma = est.ratio > 0.0 ? kGammaCap : -kGammaCap;
        return est;
    }
    double lo = 0.0;
    for (int it = 0; it < 60 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (touch_to_peak_ratio(mid, reference) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double g = 0.5 * (lo + hi);
    est.gamma = est.ratio >= 0.0 ? g : -g;
    est.status = est.ratio >= 0.0 ? GammaStatus::Advancing : GammaStatus::Retreating;
    return est;
}

double steady_distance(const BookProfile& input, const SolverConfig& cfg) {
    const BookProfile profile = input.side == Side::Bid ? mirror(input) : input;
    const double mass = total_mass(profile);
    if (!(mass > 0.0)) throw RangeError("steady_distance is undefined for an empty book");
    const auto& h = profile.h;
    const auto& grid = profile.grid;
    const std::size_t n = h.size();
    const double thr = cfg.support_epsilon * profile.max_depth();
    std::size_t first = 0;
    while (first < n && !(h[first] > thr)) ++first;
    const double touch = grid.edge(first);

    double norm = 0.0;
    for (double v : h) norm += v * v;
    norm = std::sqrt(norm);

    // For a trial extinction price, scale the square-root shape to the profile's discrete mass.
    auto distance = [&](double s_b) {
        double shape_sum = 0.0;
        for (std::size_t i = first; i < n; ++i) {
            const double c = grid.center(i);
            if (c < s_b) shape_sum += std::sqrt(s_b - c);
        }
        if (!(shape_sum > 0.0)) return 1.0;
        const double a = mass / (grid.dx() * shape_sum);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = grid.center(i);
            const double model = (i >= first && c < s_b) ? a * std::sqrt(s_b - c) : 0.0;
            diff += (h[i] - model) * (h[i] - model);
        }
        return std::sqrt(diff) / norm;
    };

    // Starting guess: h^2 = a^2 (s_b - S) is affine, so regress h^2 on S over the support.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, cnt = 0.0;
    for (std::size_t i = first; i < n; ++i) {
        if (!(h[i] > thr)) continue;
        const double x = grid.center(i), y = h[i] * h[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        cnt += 1.0;
    }
    // The extinction price lies inside the observed support: beyond it the book is empty.
    std::size_t last = n;
    while (last > first && !(h[last - 1] > thr)) --last;
    const double lo = grid.center(first) + 1e-9 * grid.dx();
    const double hi = std::max(grid.edge(last), lo + grid.dx());
    double best = distance(hi);
    if (cnt >= 2.0) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        if (slope < 0.0) {
            const double guess = (sy - slope * sx) / cnt / -slope;
            if (guess > lo && guess <= hi) best = std::min(best, distance(guess));
        }
    }
    // Coarse log-spaced scan of the extinction distance, then Brent around the best bracket.
    const std::size_t scan = 200;
    const double w_min = lo - touch, w_max = hi - touch;
    std::vector<double> cand(scan);
    for (std::size_t k = 0; k < scan; ++k) {
        cand[k] = touch + w_min * std::pow(w_max / w_min, static_cast<double>(k) / (scan - 1));
    }
    std::size_t kbest = 0;
    double dbest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < scan; ++k) {
        const double d = distance(cand[k]);
        if (d < dbest) {
            dbest = d;
            kbest = k;
        }
    }
    const double a = cand[kbest == 0 ? 0 : kbest - 1];
    const double b = cand[std::min(kbest + 1, scan - 1)];
    const auto res = boost::math::tools::brent_find_minima(distance, a, b, 52);
    return std::min({best, dbest, res.second});
}

Trajectory trajectory_from_snapshots(std::vector<BookProfile> snapshots, double t_origin,
                                     std::optional<double> touch_origin, const SolverConfig& cfg) {
    if (snapshots.empty()) throw RangeError("trajectory_from_snapshots needs at least one snapshot");
    std::sort(snapshots.begin(), snapshots.end(), [](const BookProfile& a, const BookProfile& b) { return a.t < b.t; });
    Trajectory traj{.grid = snapshots.front().grid,
                    .side = snapshots.front().side,
                    .t_origin = t_origin,
                    .touch_origin = touch_origin ? touch_origin : find_touch(snapshots.front(), cfg)};
    for (const auto& s : snapshots) {
        if (!(s.grid == traj.grid) || s.side != traj.side) throw RangeError("snapshots must share grid and side");
        if (auto touch = find_touch(s, cfg)) traj.touch_series.push_back({s.t, *touch});
        traj.mass_series.push_back({s.t, total_mass(s)});
        const std::size_t k = s.argmax();
        traj.peak_series.push_back({s.t, s.h[k]});
        traj.peak_position_series.push_back({s.t, s.grid.center(k)});
    }
    traj.snapshots = std::move(snapshots);
    return traj;
}

}  // namespace lob::analysis
