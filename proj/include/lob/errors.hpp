#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lob {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the admissible domain of an operation (bad interval, t <= 0, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Velocity requested at an empty price level, where the queue fraction q/h is undefined.
class DegenerateLevelError : public Error {
public:
    using Error::Error;
};

class InsufficientLiquidityError : public Error {
public:
    InsufficientLiquidityError(double requested, double available)
        : Error("insufficient liquidity: requested " + std::to_string(requested) +
                ", available " + std::to_string(available) + ", shortfall " +
                std::to_string(requested - available)),
          requested_(requested),
          available_(available) {}

    double requested() const noexcept { return requested_; }
    double available() const noexcept { return available_; }
    double shortfall() const noexcept { return requested_ - available_; }

private:
    double requested_;
    double available_;
};

struct Trajectory;

/// NaN/Inf appeared in the depth field. Carries whatever trajectory was recorded so far.
class NumericalBlowupError : public Error {
public:
    NumericalBlowupError(std::size_t cell, double time, std::shared_ptr<const Trajectory> partial);

    std::size_t cell() const noexcept { return cell_; }
    double time() const noexcept { return time_; }
    const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }

private:
    std::size_t cell_;
    double time_;
    std::shared_ptr<const Trajectory> partial_;
};

/// Similarity problem requested for a retreating touch (gamma < 0).
class NoPositiveSolutionError : public Error {
public:
    using Error::Error;
};

/// A series recurrence hit a vanishing pivot with a nonzero remainder.
class SeriesInconsistentError : public Error {
public:
    SeriesInconsistentError(int order, double residual)
        : Error("series recurrence inconsistent at order " + std::to_string(order) +
                " (residual " + std::to_string(residual) + ")"),
          order_(order),
          residual_(residual) {}

    int order() const noexcept { return order_; }
    double residual() const noexcept { return residual_; }

private:
    int order_;
    double residual_;
};

/// A scaling fit could not be performed (too few samples, stationary or non-monotone data).
class UnfittableError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

struct ConfigIssue {
    std::size_t line = 0;  // 0 when the issue is not tied to a line (missing key)
    std::string key;
    std::string message;
};

/// Every problem found while validating a scenario config, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);

    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

}  // namespace lob
