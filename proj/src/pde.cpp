#include "lob/pde.hpp"

#include "lob/errors.hpp"
#include "lob/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace lob {

namespace {

// Floor on the diffusion speed so the empty book still gets a finite step.
constexpr double kDtFloor = 1e-12;

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

BoundaryCondition mirrored(BoundaryCondition bc) {
    switch (bc.kind) {
        case BcKind::Slope:
        case BcKind::Flux:
        case BcKind::FirmStop: bc.value = -bc.value; break;
        default: break;
    }
    return bc;
}

BoundaryPair mirrored(const BoundaryPair& bc) { return {mirrored(bc.touch), mirrored(bc.deep)}; }

PhysicalParams mirrored(const PhysicalParams& params, std::size_t n_cells) {
    PhysicalParams out = params;
    out.source = params.source.mirrored(n_cells);
    return out;
}

double diffusion_scale(const PhysicalParams& params, const SolverConfig& cfg) {
    return cfg.flux == FluxModel::Canonical ? 1.0 : microstructure::time_rescale_factor(params);
}

// Index of the edge carrying the firm-stop wall (ask geometry); cells left of it are outside the book.
std::size_t wall_edge(const PriceGrid& grid, const BoundaryPair& bc) {
    if (bc.touch.kind != BcKind::FirmStop) return 0;
    const double k = std::round((bc.touch.value - grid.s_min()) / grid.dx());
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(grid.n_cells() - 1)));
}

// In-place explicit update in ask geometry (touch at the left edge).
class Stepper {
public:
    Stepper(const PriceGrid& grid, const PhysicalParams& params, const BoundaryPair& bc, const SolverConfig& cfg)
        : grid_(grid),
          params_(params),
          bc_(bc),
          cfg_(cfg),
          n_(grid.n_cells()),
          dx_(grid.dx()),
          wall_(wall_edge(grid, bc)),
          scale_(diffusion_scale(params, cfg)),
          flux_(n_ + 1, 0.0),
          source_(n_, 0.0) {}

    // Returns the index of the first non-finite cell, or n_ when the state is clean.
    std::size_t advance(std::vector<double>& h, double t, double dt, StepStats& stats) {
        compute_fluxes(h);
        const bool has_source = !params_.source.is_zero();
        if (has_source) {
            for (std::size_t i = wall_; i < n_; ++i) source_[i] = params_.source.rate(i, grid_.center(i), t, h[i]);
        }
        const double lambda = dt / dx_;
        for (std::size_t i = wall_; i < n_; ++i) {
            double v = h[i] + lambda * (flux_[i + 1] - flux_[i]);
            if (has_source) v += dt * source_[i];
            if (!std::isfinite(v)) return i;
            if (v < 0.0) {
                stats.clipped_mass += -v * dx_;
                v = 0.0;
            }
            h[i] = v;
        }
        stats.outflow_touch += dt * flux_[wall_];
        stats.outflow_deep -= dt * flux_[n_];
        return n_;
    }

private:
    double interior_flux(double left, double right) const {
        if (cfg_.flux == FluxModel::Microstructure) return microstructure::edge_flux(left, right, dx_, params_);
        double f = (right * right - left * left) / dx_;
        if (params_.u0 != 0.0) f += params_.u0 * (params_.u0 > 0.0 ? right : left);
        return f;
    }

    // Diffusive flux between a boundary value h_b and the adjacent cell, half a cell apart.
    double half_cell_flux(double left, double right) const {
        if (cfg_.flux == FluxModel::Microstructure) return microstructure::edge_flux(left, right, 0.5 * dx_, params_);
        return (right * right - left * left) / (0.5 * dx_);
    }

    double advective(double left, double right) const {
        if (cfg_.flux == FluxModel::Microstructure || params_.u0 == 0.0) return 0.0;
        return params_.u0 * (params_.u0 > 0.0 ? right : left);
    }

    double boundary_flux(const BoundaryCondition& b, double cell, bool left_edge) const {
        switch (b.kind) {
            case BcKind::ZeroFlux:
            case BcKind::FirmStop: return 0.0;
            case BcKind::Depth:
                return left_edge ? half_cell_flux(b.value, cell) + advective(b.value, cell)
                                 : half_cell_flux(cell, b.value) + advective(cell, b.value);
            case BcKind::Slope: return scale_ * 2.0 * cell * b.value + advective(cell, cell);
            case BcKind::Flux: return scale_ * b.value + advective(cell, cell);
        }
        return 0.0;
    }

    void compute_fluxes(const std::vector<double>& h) {
        if (cfg_.mode == SolverMode::SourceOnly) {
            std::fill(flux_.begin(), flux_.end(), 0.0);
            return;
        }
        for (std::size_t e = 0; e <= wall_; ++e) flux_[e] = 0.0;
        if (bc_.touch.kind != BcKind::FirmStop) flux_[0] = boundary_flux(bc_.touch, h[0], true);
        for (std::size_t e = wall_ + 1; e < n_; ++e) flux_[e] = interior_flux(h[e - 1], h[e]);
        flux_[n_] = boundary_flux(bc_.deep, h[n_ - 1], false);
    }

    const PriceGrid& grid_;
    const PhysicalParams& params_;
    const BoundaryPair& bc_;
    const SolverConfig& cfg_;
    std::size_t n_;
    double dx_;
    std::size_t wall_;
    double scale_;
    std::vector<double> flux_;
    std::vector<double> source_;
};

std::optional<double> find_touch_ask(const BookProfile& p, double eps_rel) {
    const double mx = p.max_depth();
    if (!(mx > 0.0)) return std::nullopt;
    const double thr = eps_rel * mx;
    const auto& h = p.h;
    const std::size_t n = h.size();
    std::size_t i = 0;
    while (i < n && !(h[i] > thr)) ++i;
    if (i == n) return std::nullopt;
    const double dx = p.grid.dx();
    const double c = p.grid.center(i);
    if (i + 1 < n && h[i + 1] > h[i]) {
        const double x = c - h[i] * dx / (h[i + 1] - h[i]);
        return std::clamp(x, std::max(c - dx, p.grid.s_min()), c);
    }
    return p.grid.edge(i);
}

Trajectory run_ask(const BookProfile& initial, const PhysicalParams& params, const BoundaryPair& bc,
                   const SolverConfig& cfg) {
    Trajectory traj{.grid = initial.grid,
                    .side = initial.side,
                    .t_origin = initial.t,
                    .touch_origin = find_touch_ask(initial, cfg.support_epsilon)};
    std::vector<double> h = initial.h;
    double t = initial.t;
    Stepper stepper(initial.grid, params, bc, cfg);
    StepStats stats;
    const double dx = initial.grid.dx();

    auto outputs = cfg.output_times;
    std::sort(outputs.begin(), outputs.end());
    std::size_t next_out = 0;
    std::size_t next_diag = 1;

    // With a firm stop the touch can never sit beyond the wall, even by the extrapolation margin.
    const double touch_floor =
        bc.touch.kind == BcKind::FirmStop ? initial.grid.edge(wall_edge(initial.grid, bc)) : initial.grid.s_min();
    auto record = [&](double time) {
        BookProfile view{initial.grid, initial.side, h, time};
        if (auto s0 = find_touch_ask(view, cfg.support_epsilon)) {
            traj.touch_series.push_back({time, std::max(*s0, touch_floor)});
        }
        double mass = 0.0;
        for (double v : h) mass += v;
        traj.mass_series.push_back({time, mass * dx});
        const std::size_t k = view.argmax();
        traj.peak_series.push_back({time, h[k]});
        traj.peak_position_series.push_back({time, initial.grid.center(k)});
    };
    auto snapshot_due = [&](double time) {
        while (next_out < outputs.size() && same_time(outputs[next_out], time)) {
            traj.snapshots.push_back(BookProfile{initial.grid, initial.side, h, outputs[next_out]});
            ++next_out;
        }
    };

    record(t);
    snapshot_due(t);

    const double diag = cfg.diagnostic_interval;
    while (t < cfg.t_end && !same_time(t, cfg.t_end)) {
        if (traj.steps >= cfg.max_steps) {
            throw Error("step limit " + std::to_string(cfg.max_steps) + " reached at t=" + std::to_string(t));
        }
        BookProfile view{initial.grid, initial.side, h, t};
        const double stable = stable_dt(view, params, cfg);
        double dt = stable;
        if (cfg.fixed_dt) {
            if (*cfg.fixed_dt > stable * (1.0 + 1e-12)) {
                throw RangeError("fixed_dt " + std::to_string(*cfg.fixed_dt) + " exceeds stable step " +
                                 std::to_string(stable) + " at t=" + std::to_string(t));
            }
            dt = *cfg.fixed_dt;
        }
        double next_stop = cfg.t_end;
        if (next_out < outputs.size()) next_stop = std::min(next_stop, outputs[next_out]);
        if (diag > 0.0) next_stop = std::min(next_stop, traj.t_origin + static_cast<double>(next_diag) * diag);
        bool landed = false;
        if (t + dt >= next_stop || same_time(t + dt, next_stop)) {
            dt = next_stop - t;
            landed = true;
        }
        const std::size_t bad = stepper.advance(h, t, dt, stats);
        if (bad < h.size()) {
            traj.outflow_touch = stats.outflow_touch;
            traj.outflow_deep = stats.outflow_deep;
            traj.clipped_mass = stats.clipped_mass;
            throw NumericalBlowupError(bad, t + dt, std::make_shared<const Trajectory>(traj));
        }
        ++traj.steps;
        if (traj.steps == 1 || dt < traj.dt_min) traj.dt_min = dt;
        traj.dt_max = std::max(traj.dt_max, dt);
        t = landed ? next_stop : t + dt;

        if (diag <= 0.0) {
            record(t);
        } else {
            bool diag_hit = false;
            while (traj.t_origin + static_cast<double>(next_diag) * diag <= t ||
                   same_time(traj.t_origin + static_cast<double>(next_diag) * diag, t)) {
                ++next_diag;
                diag_hit = true;
            }
            if (diag_hit || (landed && same_time(t, cfg.t_end))) record(t);
        }
        snapshot_due(t);
    }
    traj.outflow_touch = stats.outflow_touch;
    traj.outflow_deep = stats.outflow_deep;
    traj.clipped_mass = stats.clipped_mass;
    return traj;
}

Trajectory mirrored(const Trajectory& tr) {
    Trajectory out = tr;
    out.grid = PriceGrid(-tr.grid.s_max(), -tr.grid.s_min(), tr.grid.n_cells());
    out.side = tr.side == Side::Bid ? Side::Ask : Side::Bid;
    if (out.touch_origin) out.touch_origin = -*out.touch_origin;
    for (auto& s : out.snapshots) s = mirror(s);
    for (auto& p : out.touch_series) p.value = -p.value;
    for (auto& p : out.peak_position_series) p.value = -p.value;
    return out;
}

}  // namespace

void BoundaryPair::validate(const PriceGrid& grid, Side side) const {
    if (touch.location != BcLocation::TouchSide) throw RangeError("first boundary condition must be on the touch side");
    if (deep.location != BcLocation::DeepSide) throw RangeError("second boundary condition must be on the deep side");
    if (deep.kind == BcKind::FirmStop) throw RangeError("a firm stop is only valid on the touch side");
    for (const auto* b : {&touch, &deep}) {
        if (!std::isfinite(b->value)) throw RangeError("boundary value must be finite");
        if (b->kind == BcKind::Depth && b->value < 0.0) throw RangeError("depth boundary value must be nonnegative");
    }
    if (touch.kind == BcKind::FirmStop) {
        if (touch.value < grid.s_min() - 1e-12 || touch.value > grid.s_max() + 1e-12) {
            throw RangeError("firm stop at " + std::to_string(touch.value) + " lies outside the grid");
        }
        const double wall_off = side == Side::Ask ? touch.value - grid.s_min() : grid.s_max() - touch.value;
        if (wall_off >= grid.s_max() - grid.s_min() - grid.dx()) {
            throw RangeError("firm stop leaves no room for the book");
        }
    }
}

void SolverConfig::validate(double t_start) const {
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw RangeError("cfl_safety must lie in (0, 1]");
    if (!(support_epsilon >= 0.0)) throw RangeError("support_epsilon must be nonnegative");
    if (!std::isfinite(t_end) || t_end < t_start) throw RangeError("t_end must not precede the initial time");
    for (double t : output_times) {
        if (!(t >= t_start - 1e-12 && t <= t_end + 1e-12)) {
            throw RangeError("output time " + std::to_string(t) + " outside [" + std::to_string(t_start) + ", " +
                             std::to_string(t_end) + "]");
        }
    }
    if (!std::is_sorted(output_times.begin(), output_times.end())) throw RangeError("output times must be sorted");
    if (diagnostic_interval < 0.0) throw RangeError("diagnostic_interval must be nonnegative");
    if (fixed_dt && !(*fixed_dt > 0.0)) throw RangeError("fixed_dt must be positive");
}

const BookProfile& Trajectory::snapshot_at(double t) const {
    for (const auto& s : snapshots) {
        if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
    }
    throw LookupError("no snapshot at t=" + std::to_string(t));
}

double stable_dt(const BookProfile& profile, const PhysicalParams& params, const SolverConfig& cfg) {
    const double dx = profile.grid.dx();
    const double scale = diffusion_scale(params, cfg);
    const double adv = cfg.flux == FluxModel::Canonical ? std::abs(params.u0) : 0.0;
    double dt = cfg.cfl_safety * dx * dx / (2.0 * (2.0 * scale * profile.max_depth() + adv * dx + kDtFloor));
    const double kappa = params.source.stiffness();
    if (kappa > 0.0) dt = std::min(dt, cfg.cfl_safety / kappa);
    return dt;
}

BookProfile step(const BookProfile& profile, const PhysicalParams& params, const BoundaryPair& bc,
                 const SolverConfig& cfg, double dt, StepStats* stats) {
    if (profile.side == Side::Bid) {
        return mirror(step(mirror(profile), mirrored(params, profile.grid.n_cells()), mirrored(bc), cfg, dt, stats));
    }
    if (!(dt > 0.0)) throw RangeError("step needs dt > 0");
    StepStats local;
    Stepper stepper(profile.grid, params, bc, cfg);
    BookProfile out = profile;
    const std::size_t bad = stepper.advance(out.h, profile.t, dt, local);
    if (bad < out.h.size()) throw NumericalBlowupError(bad, profile.t + dt, nullptr);
    out.t = profile.t + dt;
    if (stats) {
        stats->clipped_mass += local.clipped_mass;
        stats->outflow_touch += local.outflow_touch;
        stats->outflow_deep += local.outflow_deep;
    }
    return out;
}

Trajectory run(const BookProfile& initial, const PhysicalParams& params, const BoundaryPair& bc,
               const SolverConfig& cfg) {
    initial.validate();
    params.validate();
    bc.validate(initial.grid, initial.side);
    cfg.validate(initial.t);
    if (initial.side == Side::Bid) {
        try {
            return mirrored(run_ask(mirror(initial), mirrored(params, initial.grid.n_cells()), mirrored(bc), cfg));
        } catch (const NumericalBlowupError& e) {
            std::shared_ptr<const Trajectory> partial;
            if (e.partial()) partial = std::make_shared<const Trajectory>(mirrored(*e.partial()));
            throw NumericalBlowupError(initial.grid.n_cells() - 1 - e.cell(), e.time(), partial);
        }
    }
    return run_ask(initial, params, bc, cfg);
}

std::optional<double> find_touch(const BookProfile& profile, const SolverConfig& cfg) {
    if (profile.side == Side::Bid) {
        auto s = find_touch_ask(mirror(profile), cfg.support_epsilon);
        if (s) return -*s;
        return std::nullopt;
    }
    return find_touch_ask(profile, cfg.support_epsilon);
}

Execution take_liquidity(const BookProfile& profile, double quantity) {
    if (!(quantity >= 0.0) || !std::isfinite(quantity)) throw RangeError("liquidity to take must be nonnegative");
    if (profile.side == Side::Bid) {
        Execution e = take_liquidity(mirror(profile), quantity);
        for (auto& lvl : e.levels) lvl.price = -lvl.price;
        return {mirror(e.book), std::move(e.levels)};
    }
    const double available = total_mass(profile);
    if (quantity > available * (1.0 + 1e-12)) throw InsufficientLiquidityError(quantity, available);
    Execution e{profile, {}};
    const double dx = profile.grid.dx();
    double remaining = quantity;
    for (std::size_t i = 0; i < e.book.h.size() && remaining > 0.0; ++i) {
        const double level = e.book.h[i] * dx;
        if (level <= 0.0) continue;
        const double take = std::min(level, remaining);
        e.book.h[i] = take >= level ? 0.0 : (level - take) / dx;
        remaining -= take;
        e.levels.push_back({profile.grid.center(i), take});
    }
    return e;
}

}  // namespace lob
