#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace lob {

/// Uniform finite-volume grid over price. Depth lives at cell centers,
/// fluxes at the n_cells + 1 edges. Negative prices are allowed.
class PriceGrid {
public:
    PriceGrid(double s_min, double s_max, std::size_t n_cells);

    double s_min() const noexcept { return s_min_; }
    double s_max() const noexcept { return s_max_; }
    std::size_t n_cells() const noexcept { return n_cells_; }
    double dx() const noexcept { return dx_; }

    double center(std::size_t i) const noexcept { return s_min_ + (static_cast<double>(i) + 0.5) * dx_; }
    /// Edge i in [0, n_cells]; edge i is the left edge of cell i.
    double edge(std::size_t i) const noexcept { return s_min_ + static_cast<double>(i) * dx_; }

    std::vector<double> centers() const;

    friend bool operator==(const PriceGrid&, const PriceGrid&) = default;

private:
    double s_min_;
    double s_max_;
    std::size_t n_cells_;
    double dx_;
};

enum class Side { Bid, Ask };

std::string_view to_string(Side side);

/// One side of the book: depth h(S, t) in lots per unit price, sampled per cell.
struct BookProfile {
    PriceGrid grid;
    Side side = Side::Ask;
    std::vector<double> h;
    double t = 0.0;

    static BookProfile zeros(const PriceGrid& grid, Side side = Side::Ask, double t = 0.0);
    static BookProfile from_function(const PriceGrid& grid, const std::function<double(double)>& depth,
                                     Side side = Side::Ask, double t = 0.0);

    /// Throws RangeError if the length does not match the grid or any depth is negative/non-finite.
    void validate() const;

    double max_depth() const;
    std::size_t argmax() const;
};

/// Reflects prices S -> -S so bid books can be processed with the touch on the left.
BookProfile mirror(const BookProfile& profile);

/// Creation/cancellation rate P(S, t) away from the touch.
class SourceTerm {
public:
    struct Zero {};
    /// Fixed rate per cell.
    struct Tabulated {
        std::vector<double> rates;
    };
    /// P = kappa * (target - h); a single target value broadcasts to every cell.
    struct Relaxation {
        double kappa = 0.0;
        std::vector<double> target;
    };
    /// Arbitrary P(S, t).
    struct Function {
        std::function<double(double, double)> rate;
    };

    SourceTerm() = default;

    static SourceTerm zero() { return SourceTerm{}; }
    static SourceTerm tabulated(std::vector<double> rates);
    static SourceTerm relaxation(double kappa, std::vector<double> target);
    static SourceTerm relaxation(double kappa, double target);
    static SourceTerm function(std::function<double(double, double)> rate);

    double rate(std::size_t cell, double price, double t, double depth) const;
    bool is_zero() const noexcept { return std::holds_alternative<Zero>(impl_); }
    /// Largest |dP/dh|; bounds the explicit step for relaxation sources.
    double stiffness() const noexcept;

    /// Source as seen from the mirrored (S -> -S) geometry.
    SourceTerm mirrored(std::size_t n_cells) const;

private:
    using Impl = std::variant<Zero, Tabulated, Relaxation, Function>;
    explicit SourceTerm(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_{Zero{}};
};

/// Constitutive constants of the flowing-order model.
struct PhysicalParams {
    double theta = 1.0;  ///< pressure per unit depth
    double rho = 1.0;    ///< inertia coefficient
    double beta = 1.0;   ///< queue-mobility exponent
    double u0 = 0.0;     ///< slip rate at the front of the queue
    SourceTerm source{};

    /// Throws RangeError unless theta, rho, beta > 0 and u0 is finite.
    void validate() const;
};

/// Quantity between two prices: integral of the piecewise-constant cell data over [s1, s2].
double volume(const BookProfile& profile, double s1, double s2);

/// Volume over the whole grid.
double total_mass(const BookProfile& profile);

/// Max |a - b| over cells; the grids must have the same size.
double linf_distance(std::span<const double> a, std::span<const double> b);

/// Sum |a - b| * dx.
double l1_distance(std::span<const double> a, std::span<const double> b, double dx);

}  // namespace lob
