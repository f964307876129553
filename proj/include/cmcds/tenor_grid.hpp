#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cmcds/errors.hpp"

namespace cmcds {

/// Payment/reset schedule: dates T_0 < T_1 < ... < T_N (year offsets) and the
/// year fractions alpha_i of [T_{i-1}, T_i].  Index conventions follow the
/// usual market-model layout: alpha(i) is defined for i = 1..N.
class TenorGrid {
public:
    /// Build from times and accruals. When accruals are supplied they are
    /// checked against time differences within `accrualTolerance`; published
    /// curve tables are rounded, so loaders pass a looser tolerance than the
    /// default used for programmatic construction.
    TenorGrid(std::vector<double> times, std::vector<double> accruals,
              double accrualTolerance = 1e-9)
        : times_(std::move(times)), accruals_(std::move(accruals)) {
        validate(accrualTolerance);
    }

    /// Accruals derived from consecutive time differences.
    explicit TenorGrid(std::vector<double> times) : times_(std::move(times)) {
        accruals_.reserve(times_.size() > 0 ? times_.size() - 1 : 0);
        for (std::size_t i = 1; i < times_.size(); ++i)
            accruals_.push_back(times_[i] - times_[i - 1]);
        validate(0.0);
    }

    /// Number of accrual periods N (grid has N+1 dates).
    std::size_t periods() const { return accruals_.size(); }

    double time(std::size_t i) const { return times_.at(i); }

    /// Year fraction of [T_{i-1}, T_i]; valid for i = 1..N.
    double alpha(std::size_t i) const {
        if (i == 0 || i > accruals_.size())
            throw ValidationError("alpha index out of range: " + std::to_string(i));
        return accruals_[i - 1];
    }

    const std::vector<double>& times() const { return times_; }

    double firstTime() const { return times_.front(); }
    double lastTime() const { return times_.back(); }

    /// Index of the grid date matching t within tol, or -1.
    int indexOf(double t, double tol = 1e-6) const {
        for (std::size_t i = 0; i < times_.size(); ++i)
            if (std::abs(times_[i] - t) <= tol) return static_cast<int>(i);
        return -1;
    }

    bool operator==(const TenorGrid& o) const {
        return times_ == o.times_ && accruals_ == o.accruals_;
    }

private:
    void validate(double tol) const {
        if (times_.size() < 2)
            throw ValidationError("tenor grid needs at least two dates");
        if (times_.front() < 0.0)
            throw ValidationError("tenor grid starts before 0");
        if (accruals_.size() != times_.size() - 1)
            throw ValidationError("accrual count must be one less than date count");
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (times_[i] <= times_[i - 1])
                throw ValidationError("tenor grid times not strictly increasing at index " +
                                      std::to_string(i));
            const double a = accruals_[i - 1];
            if (a <= 0.0)
                throw ValidationError("non-positive accrual at index " + std::to_string(i));
            if (tol > 0.0 && std::abs(a - (times_[i] - times_[i - 1])) > tol)
                throw ValidationError("accrual/date mismatch at index " + std::to_string(i) +
                                      ": alpha=" + std::to_string(a) + " vs dT=" +
                                      std::to_string(times_[i] - times_[i - 1]));
        }
    }

    std::vector<double> times_;
    std::vector<double> accruals_;
};

} // namespace cmcds
