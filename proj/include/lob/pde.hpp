#pragma once

#include "lob/core.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace lob {

enum class BcKind {
    Depth,     ///< h = value at the boundary edge
    Slope,     ///< h_S = value at the boundary edge
    Flux,      ///< (h^2)_S = value at the boundary edge
    ZeroFlux,  ///< no quantity crosses the edge
    FirmStop,  ///< impenetrable wall at price `value` on the touch side
};

enum class BcLocation { TouchSide, DeepSide };

struct BoundaryCondition {
    BcKind kind = BcKind::ZeroFlux;
    double value = 0.0;
    BcLocation location = BcLocation::TouchSide;

    static BoundaryCondition depth(double h0, BcLocation loc) { return {BcKind::Depth, h0, loc}; }
    static BoundaryCondition slope(double p0, BcLocation loc) { return {BcKind::Slope, p0, loc}; }
    static BoundaryCondition flux(double q0, BcLocation loc) { return {BcKind::Flux, q0, loc}; }
    static BoundaryCondition zero_flux(BcLocation loc) { return {BcKind::ZeroFlux, 0.0, loc}; }
    /// Wall at `price`; the support may not advance past it.
    static BoundaryCondition firm_stop(double price) { return {BcKind::FirmStop, price, BcLocation::TouchSide}; }
};

/// Touch-side and deep-side conditions. For a bid book "touch side" is the high-price end.
struct BoundaryPair {
    BoundaryCondition touch = BoundaryCondition::zero_flux(BcLocation::TouchSide);
    BoundaryCondition deep = BoundaryCondition::zero_flux(BcLocation::DeepSide);

    /// Throws RangeError on misplaced or inadmissible conditions.
    void validate(const PriceGrid& grid, Side side) const;
};

enum class SolverMode { Full, SourceOnly };

/// Which edge flux drives the update.
enum class FluxModel {
    Canonical,       ///< F = (h^2)_S + u0 h, the rescaled transport equation
    Microstructure,  ///< Q from the queue-resolved velocity profile, in physical time
};

struct SolverConfig {
    double cfl_safety = 0.25;
    /// Touch threshold relative to the current max depth.
    double support_epsilon = 1e-10;
    double t_end = 1.0;
    /// Snapshot times; must lie in [initial.t, t_end].
    std::vector<double> output_times;
    SolverMode mode = SolverMode::Full;
    FluxModel flux = FluxModel::Canonical;
    /// Spacing of touch/mass samples. 0 records every step.
    double diagnostic_interval = 0.0;
    /// Use this step instead of the adaptive one; must not exceed stable_dt.
    std::optional<double> fixed_dt;
    std::size_t max_steps = 50'000'000;

    void validate(double t_start) const;
};

/// Per-step bookkeeping for the conservation audit.
struct StepStats {
    double clipped_mass = 0.0;
    double outflow_touch = 0.0;
    double outflow_deep = 0.0;
};

struct TimedValue {
    double t = 0.0;
    double value = 0.0;
};

struct Trajectory {
    PriceGrid grid;
    Side side = Side::Ask;
    /// Time of the liquidity-taking event; scaling fits measure time from here.
    double t_origin = 0.0;
    std::optional<double> touch_origin;

    std::vector<BookProfile> snapshots{};
    std::vector<TimedValue> touch_series{};
    std::vector<TimedValue> mass_series{};
    std::vector<TimedValue> peak_series{};       ///< max depth
    std::vector<TimedValue> peak_position_series{};
    double outflow_touch = 0.0;
    double outflow_deep = 0.0;
    double clipped_mass = 0.0;
    std::size_t steps = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;

    const BookProfile& snapshot_at(double t) const;
};

/// Explicit step limit cfl * dx^2 / (2 (2 c max h + |u0| dx + eps)), where c is 1 for the
/// canonical flux and the time rescale factor for the microstructure flux. Relaxation
/// sources additionally cap the step at cfl / kappa.
double stable_dt(const BookProfile& profile, const PhysicalParams& params, const SolverConfig& cfg);

/// One explicit conservative update. Negative undershoot is clipped to zero and reported in stats.
BookProfile step(const BookProfile& profile, const PhysicalParams& params, const BoundaryPair& bc,
                 const SolverConfig& cfg, double dt, StepStats* stats = nullptr);

/// Integrate from initial.t to cfg.t_end, landing exactly on every output and diagnostic time.
Trajectory run(const BookProfile& initial, const PhysicalParams& params, const BoundaryPair& bc,
               const SolverConfig& cfg);

/// Touch price: where the support begins, scanning from the touch side, with the threshold
/// support_epsilon * max(h). The position is extrapolated to zero depth from the first
/// superthreshold pair of cells and kept inside the first superthreshold cell's neighbourhood.
/// Returns nullopt for an empty book.
std::optional<double> find_touch(const BookProfile& profile, const SolverConfig& cfg = {});

struct ExecutedLevel {
    double price = 0.0;     ///< cell center
    double quantity = 0.0;  ///< lots removed from this cell
};

struct Execution {
    BookProfile book;
    std::vector<ExecutedLevel> levels;
};

/// Aggressive order sweeping `quantity` lots from the touch side, cell by cell.
Execution take_liquidity(const BookProfile& profile, double quantity);

}  // namespace lob
