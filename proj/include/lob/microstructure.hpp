#pragma once

#include "lob/core.hpp"

#include <cstddef>
#include <vector>

namespace lob::microstructure {

/// Quantity resting ahead of an order at its level, 0 <= q <= h.
struct QueuePosition {
    double q = 0.0;
};

/// p = theta * h per cell.
std::vector<double> pressure(const BookProfile& profile, const PhysicalParams& params);

/// dp/dS at cell i: central difference inside, first-order one-sided at the two end cells.
double pressure_gradient(const BookProfile& profile, const PhysicalParams& params, std::size_t i);

/// Queue-resolved velocity (1/rho) p_S [(q/h)^beta + u0].
/// Orders at the front of the queue (q = 0) move only at the slip rate.
/// Throws DegenerateLevelError when h[i] = 0 and RangeError when q is outside [0, h].
double velocity(const BookProfile& profile, const PhysicalParams& params, std::size_t i, QueuePosition q);

/// Integral of the velocity over the queue: (1/rho) p_S h [1/(beta+1) + u0]. Zero at empty levels.
double level_flux(const BookProfile& profile, const PhysicalParams& params, std::size_t i);

/// Flux through the edge between two cells, built from the same closed form with
/// the edge depth taken as the mean of the neighbours.
double edge_flux(double h_left, double h_right, double dx, const PhysicalParams& params);

/// Factor c such that the microstructure evolution at physical time T equals the
/// canonical h_t = (h^2)_SS evolution at time c * T.
///
/// Substituting p = theta h into the level flux gives
///   Q = (theta / rho) [1/(beta+1) + u0] h h_S = (theta / (2 rho)) [1/(beta+1) + u0] (h^2)_S,
/// so c = theta (1/(beta+1) + u0) / (2 rho). The factor 1/2 comes from h h_S = (h^2)_S / 2,
/// and the slip enters as extra diffusion rather than as advection.
double time_rescale_factor(const PhysicalParams& params);

}  // namespace lob::microstructure
