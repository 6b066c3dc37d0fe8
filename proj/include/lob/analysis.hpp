#pragma once

#include "lob/pde.hpp"
#include "lob/similarity.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace lob::analysis {

struct FitWindow {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

/// Least-squares power law y = prefactor * (t - t_origin)^exponent, fitted in log-log space.
struct ScalingFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    FitWindow window;
    double r_squared = 0.0;
    /// log-space residuals, one per sample used.
    std::vector<double> residuals;
    std::size_t samples = 0;
};

/// Skips the first 20% of the run after the trajectory origin, where the initial kink is smoothed out.
FitWindow default_window(const Trajectory& traj);

/// Generic log-log fit of positive values against time since `t_origin`.
ScalingFit fit_power_law(const std::vector<TimedValue>& series, double t_origin, FitWindow window);

/// Fits |S0(t) - S0(origin)| against t - t_origin using the trajectory's recorded origin.
/// Throws UnfittableError with fewer than 8 samples, a stationary touch (total movement under
/// one cell) or a displacement that reverses by more than half a cell.
ScalingFit fit_touch_exponent(const Trajectory& traj, FitWindow window);

/// Fits the peak depth against t - t_origin.
ScalingFit fit_height_exponent(const Trajectory& traj, FitWindow window);

struct CollapseReport {
    std::vector<double> times;
    std::vector<double> s_grid;
    /// profiles[k][j]: snapshot k rescaled to unit peak height and unit peak offset, at s_grid[j].
    std::vector<std::vector<double>> profiles;
    /// Symmetric matrix of relative L2 distances.
    std::vector<std::vector<double>> distances;
    double max_distance = 0.0;
};

/// Rescales each snapshot with its measured touch, peak height and peak offset
/// (s = (S - S0) / (S_peak - S0), v = h / h_peak) and compares the shapes pairwise.
CollapseReport collapse(const Trajectory& traj, const std::vector<double>& times);

enum class GammaStatus {
    Advancing,   ///< inside the positive similarity family
    Stationary,  ///< touch did not move by a cell across the window; gamma = 0
    Retreating,  ///< negative estimate, outside the family
    CapLimit,    ///< touch speed reaches the peak speed: the zero-flux cap limit, beyond the family
};

std::string_view to_string(GammaStatus status);

struct GammaEstimate {
    double gamma = 0.0;
    /// touch_speed / peak_scale, the measured invariant that is matched to the reference family.
    double ratio = 0.0;
    /// sigma in S0(t) = S0(origin) -/+ sigma (t - t_origin)^(1/3), positive when advancing.
    double touch_speed = 0.0;
    /// l in S_peak(t) - S0(t) = l (t - t_origin)^(1/3).
    double peak_scale = 0.0;
    GammaStatus status = GammaStatus::Advancing;
};

/// Touch speed in similarity units, normalised to the v_inf = 1 member of the family.
///
/// With S0 = S0(origin) - sigma tau^(1/3) (ask side) and a similarity profile h = H v((S - S0)/L),
/// L = L0 tau^(1/3), the relation gamma = (H / (L dH/dt)) dS0/dt evaluates to sigma / L0, because
/// H ~ tau^(-1/3) gives H / dH/dt = -3 tau and dS0/dt = -sigma tau^(-2/3) / 3. The sign is chosen
/// so that an advancing touch has gamma > 0, which is also the sign carried by the similarity equation.
/// L0 itself is unobservable, but the peak offset is L0 s_peak, so sigma / l = gamma / s_peak(gamma).
/// The family is invariant under v -> c^2 v(s / c), gamma -> c gamma, so the ratio depends on the
/// single combination gamma^3 / v_inf; it is inverted on the reference family with v_inf = 1.
GammaEstimate estimate_gamma(const Trajectory& traj, FitWindow window, const similarity::ShootingConfig& reference = {});

/// gamma / s_peak(gamma) on the reference family.
double touch_to_peak_ratio(double gamma, const similarity::ShootingConfig& reference = {});

/// Relative L2 distance to the closest member of the steady square-root family that starts at the
/// profile's touch and carries the same discrete mass. Throws RangeError for an empty book.
double steady_distance(const BookProfile& profile, const SolverConfig& cfg = {});

/// Rebuilds the touch/mass/peak series of a trajectory from its snapshots. Without an explicit
/// touch origin the touch of the earliest snapshot is used.
Trajectory trajectory_from_snapshots(std::vector<BookProfile> snapshots, double t_origin,
                                     std::optional<double> touch_origin = std::nullopt,
                                     const SolverConfig& cfg = {});

}  // namespace lob::analysis
