#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cmcds/errors.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

namespace detail {

/// Log-linear interpolation on grid knots; exact (bitwise) at the knots.
inline double logLinearAt(const TenorGrid& grid, const std::vector<double>& values, double t,
                          const char* what) {
    const auto& times = grid.times();
    if (t < times.front() || t > times.back())
        throw ValidationError(std::string(what) + ": time " + std::to_string(t) +
                              " outside curve span [" + std::to_string(times.front()) + ", " +
                              std::to_string(times.back()) + "]");
    // exact knot hit
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] == t) return values[i];
    std::size_t k = 1;
    while (times[k] < t) ++k;
    const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return values[k - 1] * std::exp(w * std::log(values[k] / values[k - 1]));
}

} // namespace detail

/// Default-free zero-coupon bond prices P(0,T_i) on the tenor grid.
class DiscountCurve {
public:
    DiscountCurve(std::shared_ptr<const TenorGrid> grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->times().size())
            throw ValidationError("discount curve size does not match grid");
        if (values_.front() > 1.0)
            throw ValidationError("discount factor above 1 at first date");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i] <= 0.0)
                throw ValidationError("non-positive discount factor at index " + std::to_string(i));
            if (i > 0 && values_[i] >= values_[i - 1])
                throw ValidationError("discount factors not strictly decreasing at index " +
                                      std::to_string(i));
        }
    }

    const TenorGrid& grid() const { return *grid_; }
    std::shared_ptr<const TenorGrid> gridPtr() const { return grid_; }

    double value(std::size_t i) const { return values_.at(i); }
    const std::vector<double>& values() const { return values_; }

    /// P(0,t) off grid points, log-linear in t.
    double at(double t) const { return detail::logLinearAt(*grid_, values_, t, "discount curve"); }

private:
    std::shared_ptr<const TenorGrid> grid_;
    std::vector<double> values_;
};

/// Risk-neutral survival probabilities Q(tau > T_i) on the tenor grid.
class SurvivalCurve {
public:
    SurvivalCurve(std::shared_ptr<const TenorGrid> grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->times().size())
            throw ValidationError("survival curve size does not match grid");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i] <= 0.0 || values_[i] > 1.0)
                throw ValidationError("survival probability outside (0,1] at index " +
                                      std::to_string(i));
            if (i > 0 && values_[i] > values_[i - 1])
                throw ValidationError("survival probabilities increasing at index " +
                                      std::to_string(i));
        }
    }

    const TenorGrid& grid() const { return *grid_; }
    std::shared_ptr<const TenorGrid> gridPtr() const { return grid_; }

    double value(std::size_t i) const { return values_.at(i); }
    const std::vector<double>& values() const { return values_; }

    /// Q(tau > t) off grid points: log-linear, i.e. piecewise-constant hazard
    /// between knots. Exact at the knots.
    double at(double t) const { return detail::logLinearAt(*grid_, values_, t, "survival curve"); }

private:
    std::shared_ptr<const TenorGrid> grid_;
    std::vector<double> values_;
};

/// Defaultable zero-coupon bond Pbar(0,T_i) = P(0,T_i) * Q(tau > T_i), the
/// independence reduction of E[D(0,T_i) 1{tau > T_i}].
inline double defaultableBond(const DiscountCurve& d, const SurvivalCurve& s, std::size_t i) {
    if (i >= d.values().size())
        throw ValidationError("defaultable bond index out of range: " + std::to_string(i));
    return d.value(i) * s.value(i);
}

/// All Pbar(0,T_i) for i = 0..N.
inline std::vector<double> defaultableBonds(const DiscountCurve& d, const SurvivalCurve& s) {
    std::vector<double> out(d.values().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = d.value(i) * s.value(i);
    return out;
}

} // namespace cmcds
