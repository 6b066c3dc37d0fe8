#include "lob/microstructure.hpp"

#include "lob/errors.hpp"

#include <cmath>
#include <string>

namespace lob::microstructure {

std::vector<double> pressure(const BookProfile& profile, const PhysicalParams& params) {
    std::vector<double> p(profile.h.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = params.theta * profile.h[i];
    return p;
}

double pressure_gradient(const BookProfile& profile, const PhysicalParams& params, std::size_t i) {
    const auto& h = profile.h;
    const std::size_t n = h.size();
    if (i >= n) throw RangeError("cell index " + std::to_string(i) + " out of range");
    const double dx = profile.grid.dx();
    double dh = 0.0;
    if (i == 0) {
        dh = (h[1] - h[0]) / dx;
    } else if (i + 1 == n) {
        dh = (h[n - 1] - h[n - 2]) / dx;
    } else {
        dh = (h[i + 1] - h[i - 1]) / (2.0 * dx);
    }
    return params.theta * dh;
}

double velocity(const BookProfile& profile, const PhysicalParams& params, std::size_t i, QueuePosition q) {
    if (i >= profile.h.size()) throw RangeError("cell index " + std::to_string(i) + " out of range");
    const double depth = profile.h[i];
    if (!(depth > 0.0)) {
        throw DegenerateLevelError("velocity undefined at empty level " + std::to_string(i));
    }
    if (q.q < 0.0 || q.q > depth) {
        throw RangeError("queue position " + std::to_string(q.q) + " outside [0, " + std::to_string(depth) + "]");
    }
    const double ps = pressure_gradient(profile, params, i);
    return ps / params.rho * (std::pow(q.q / depth, params.beta) + params.u0);
}

double level_flux(const BookProfile& profile, const PhysicalParams& params, std::size_t i) {
    if (i >= profile.h.size()) throw RangeError("cell index " + std::to_string(i) + " out of range");
    const double depth = profile.h[i];
    if (depth == 0.0) return 0.0;
    const double ps = pressure_gradient(profile, params, i);
    return ps / params.rho * depth * (1.0 / (params.beta + 1.0) + params.u0);
}

double edge_flux(double h_left, double h_right, double dx, const PhysicalParams& params) {
    const double ps = params.theta * (h_right - h_left) / dx;
    const double depth = 0.5 * (h_left + h_right);
    return ps / params.rho * depth * (1.0 / (params.beta + 1.0) + params.u0);
}

double time_rescale_factor(const PhysicalParams& params) {
    return params.theta * (1.0 / (params.beta + 1.0) + params.u0) / (2.0 * params.rho);
}

}  // namespace lob::microstructure
