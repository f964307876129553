#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cmcds/curves.hpp"
#include "cmcds/errors.hpp"
#include "cmcds/market_data.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

/// Piecewise-constant default intensity: lambdas_[k] applies on
/// (knots_[k], knots_[k+1]]; flat extrapolation after the last knot.
class HazardCurve {
public:
    HazardCurve(std::vector<double> knots, std::vector<double> lambdas, double baseSurvival = 1.0)
        : knots_(std::move(knots)), lambdas_(std::move(lambdas)), base_(baseSurvival) {
        if (knots_.size() != lambdas_.size() + 1)
            throw ValidationError("hazard curve needs one knot more than segments");
        for (double l : lambdas_)
            if (l < 0.0) throw ValidationError("negative hazard rate");
    }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    double baseSurvival() const { return base_; }

    /// Q(tau > t) = base * exp(-int_{knots[0]}^t lambda)
    double survival(double t) const {
        if (t < knots_.front())
            throw ValidationError("hazard curve evaluated before first knot");
        double integral = 0.0;
        for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
            const double lo = knots_[k];
            const double hi = std::min(knots_[k + 1], t);
            if (hi > lo) integral += lambdas_[k] * (hi - lo);
            if (t <= knots_[k + 1]) return base_ * std::exp(-integral);
        }
        integral += lambdas_.back() * (t - knots_.back()); // flat extrapolation
        return base_ * std::exp(-integral);
    }

    SurvivalCurve onGrid(std::shared_ptr<const TenorGrid> grid) const {
        std::vector<double> q;
        q.reserve(grid->times().size());
        for (double t : grid->times())
            q.push_back(survival(t));
        return SurvivalCurve(std::move(grid), std::move(q));
    }

private:
    std::vector<double> knots_;
    std::vector<double> lambdas_;
    double base_;
};

/// Present value to the protection seller of a postponed-payments running CDS
/// over (T_a, T_b] at premium rate R:
///   R * sum alpha_i P(0,T_i) Q(tau>T_i)  -  LGD * sum P(0,T_i) (Q(tau>T_{i-1}) - Q(tau>T_i))
/// Interest rates and credit are taken independent, so the joint expectations
/// factor into P * Q.
inline double pricePrcds(const DiscountCurve& d, const SurvivalCurve& s, std::size_t a,
                         std::size_t b, double rate, double lgd) {
    if (a >= b || b >= d.values().size())
        throw ValidationError("invalid protection window [" + std::to_string(a) + "," +
                              std::to_string(b) + "]");
    if (lgd <= 0.0 || lgd > 1.0)
        throw ValidationError("loss given default must lie in (0,1]");
    const TenorGrid& grid = d.grid();
    double premium = 0.0, protection = 0.0;
    for (std::size_t i = a + 1; i <= b; ++i) {
        premium += grid.alpha(i) * d.value(i) * s.value(i);
        protection += d.value(i) * (s.value(i - 1) - s.value(i));
    }
    return rate * premium - lgd * protection;
}

struct StripResult {
    HazardCurve hazard;
    SurvivalCurve survival;
};

/// Bootstrap a piecewise-constant hazard curve from spot CDS quotes.
///
/// For each quote maturity in increasing order, solves for the segment
/// intensity that zeroes the postponed-CDS par equation at the mid quote,
/// holding earlier segments fixed.  Bisection on lambda in [0,10] down to a
/// 1e-12 step; the par residual is strictly decreasing in lambda, so the
/// bracket is guaranteed when a non-negative root exists.
inline StripResult stripHazard(const DiscountCurve& d, std::shared_ptr<const TenorGrid> grid,
                               const CdsQuoteSet& quotes, double baseSurvival = 1.0) {
    quotes.validate();
    if (quotes.size() == 0)
        throw ValidationError("no quotes to strip");
    const auto quoteIdx = quoteGridIndices(*grid, quotes);
    const double lgd = quotes.lgd();
    const std::size_t n = grid->times().size();

    std::vector<double> q(n, baseSurvival);
    std::vector<double> knots{grid->time(0)};
    std::vector<double> lambdas;
    std::size_t segStart = 0;

    for (std::size_t k = 0; k < quotes.size(); ++k) {
        const std::size_t b = quoteIdx[k];
        const double mid = quotes.mid(k);

        auto residual = [&](double lambda) {
            // survival out to T_b with trial lambda on (T_segStart, T_b]
            std::vector<double> trial(q.begin(), q.begin() + b + 1);
            for (std::size_t i = segStart + 1; i <= b; ++i)
                trial[i] = trial[i - 1] * std::exp(-lambda * (grid->time(i) - grid->time(i - 1)));
            double premium = 0.0, protection = 0.0;
            for (std::size_t i = 1; i <= b; ++i) {
                premium += grid->alpha(i) * d.value(i) * trial[i];
                protection += d.value(i) * (trial[i - 1] - trial[i]);
            }
            return mid * premium - lgd * protection;
        };

        double lo = 0.0, hi = 10.0;
        const double fLo = residual(lo);
        if (fLo < -1e-12)
            throw NumericalError("no root in hazard bracket at maturity " +
                                 std::to_string(grid->time(b)) +
                                 ": quote implies negative hazard");
        if (residual(hi) > 0.0)
            throw NumericalError("no root in hazard bracket at maturity " +
                                 std::to_string(grid->time(b)) + ": quote exceeds bracket");
        while (hi - lo > 1e-12) {
            const double mid2 = 0.5 * (lo + hi);
            if (residual(mid2) >= 0.0)
                lo = mid2;
            else
                hi = mid2;
        }
        const double lambda = 0.5 * (lo + hi);

        for (std::size_t i = segStart + 1; i <= b; ++i)
            q[i] = q[i - 1] * std::exp(-lambda * (grid->time(i) - grid->time(i - 1)));
        knots.push_back(grid->time(b));
        lambdas.push_back(lambda);
        segStart = b;
    }

    // flat extrapolation to the end of the grid
    for (std::size_t i = segStart + 1; i < n; ++i)
        q[i] = q[i - 1] * std::exp(-lambdas.back() * (grid->time(i) - grid->time(i - 1)));

    HazardCurve hc(std::move(knots), std::move(lambdas), baseSurvival);
    SurvivalCurve sc(grid, std::move(q));
    return {std::move(hc), std::move(sc)};
}

} // namespace cmcds
