#pragma once

// Forward CDS rates off a discount/survival curve pair:
//   R_{a,b}(0)      multi-period forward rate, protection-leg / premium-leg
//   R_k(0)          one-period rates (a = k-1, b = k), also via the
//                   difference quotient on spot rates
//   Rtilde_k(0)     bond-ratio approximation of R_k, exact under independence
//   R_{k-2,k}(0)    two-period rates, needed to close the joint dynamics

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cmcds/curves.hpp"
#include "cmcds/errors.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

inline double forwardCdsRate(const DiscountCurve& d, const SurvivalCurve& s, std::size_t a,
                             std::size_t b, double lgd) {
    if (a >= b || b >= d.values().size())
        throw ValidationError("invalid rate window [" + std::to_string(a) + "," +
                              std::to_string(b) + "]");
    const TenorGrid& grid = d.grid();
    double protection = 0.0, annuity = 0.0;
    for (std::size_t i = a + 1; i <= b; ++i) {
        protection += d.value(i) * (s.value(i - 1) - s.value(i));
        annuity += grid.alpha(i) * d.value(i) * s.value(i);
    }
    if (annuity <= 0.0)
        throw NumericalError("zero premium-leg annuity in [" + std::to_string(a) + "," +
                             std::to_string(b) + "]");
    return lgd * protection / annuity;
}

/// Rtilde_k(0) = LGD * (Pbar_{k-1} P_k / P_{k-1} - Pbar_k) / (alpha_k Pbar_k).
/// Under independence of rates and credit this reduces to
/// (LGD/alpha_k) (Q_{k-1}/Q_k - 1) and coincides with R_k(0).
inline double onePeriodRateTilde(const DiscountCurve& d, const SurvivalCurve& s, std::size_t k,
                                 double lgd) {
    if (k == 0 || k >= d.values().size())
        throw ValidationError("one-period rate index out of range: " + std::to_string(k));
    const double alpha = d.grid().alpha(k);
    const double pbarPrev = d.value(k - 1) * s.value(k - 1);
    const double pbar = d.value(k) * s.value(k);
    return lgd * (pbarPrev * d.value(k) / d.value(k - 1) - pbar) / (alpha * pbar);
}

/// One-period rates from spot rates R_{0,k} by the telescoping difference
/// quotient; spot[k] holds R_{0,k} for k >= 1 and pbar[i] = Pbar(0,T_i).
/// Entry 0 of the result is unused (NaN).
inline std::vector<double> onePeriodRatesFromSpot(const std::vector<double>& spot,
                                                  const std::vector<double>& pbar,
                                                  const TenorGrid& grid) {
    const std::size_t n = grid.periods();
    if (spot.size() < n + 1 || pbar.size() < n + 1)
        throw ValidationError("spot rates and bonds must cover the full grid");
    std::vector<double> r(n + 1, std::numeric_limits<double>::quiet_NaN());
    double annuityPrev = 0.0; // sum_{h<=k-1} alpha_h Pbar_h
    for (std::size_t k = 1; k <= n; ++k) {
        const double a = grid.alpha(k) * pbar[k];
        if (a <= 0.0)
            throw ValidationError("non-positive annuity weight at index " + std::to_string(k));
        const double annuity = annuityPrev + a;
        const double prevTerm = k >= 2 ? spot[k - 1] * annuityPrev : 0.0;
        if (k >= 2 && !(spot[k - 1] == spot[k - 1]))
            throw ValidationError("missing intermediate spot rate at index " +
                                  std::to_string(k - 1));
        r[k] = (spot[k] * annuity - prevTerm) / a;
        annuityPrev = annuity;
    }
    return r;
}

struct RateSet {
    std::shared_ptr<const TenorGrid> grid;
    std::vector<double> onePeriod;      // R_k(0), valid for k = 1..N
    std::vector<double> onePeriodTilde; // Rtilde_k(0), valid for k = 1..N
    std::vector<double> twoPeriod;      // R_{k-2,k}(0), valid for k = 2..N (may be empty)

    bool hasTwoPeriod() const { return !twoPeriod.empty(); }
};

/// All rate families off the curve pair. Two-period rates are forward rates
/// over (T_{k-2}, T_k].
inline RateSet buildRateSet(const DiscountCurve& d, const SurvivalCurve& s, double lgd,
                            bool withTwoPeriod = false) {
    const std::size_t n = d.grid().periods();
    RateSet rs;
    rs.grid = d.gridPtr();
    rs.onePeriod.assign(n + 1, std::numeric_limits<double>::quiet_NaN());
    rs.onePeriodTilde.assign(n + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k <= n; ++k) {
        rs.onePeriod[k] = forwardCdsRate(d, s, k - 1, k, lgd);
        rs.onePeriodTilde[k] = onePeriodRateTilde(d, s, k, lgd);
    }
    if (withTwoPeriod) {
        rs.twoPeriod.assign(n + 1, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t k = 2; k <= n; ++k)
            rs.twoPeriod[k] = forwardCdsRate(d, s, k - 2, k, lgd);
    }
    return rs;
}

/// Standing assumption R_{k-2,k} != R_k, plus the interval condition keeping
/// reconstructed Pbar positive and decreasing:
/// R_{k-2,k} strictly between R_{k-1} and (R_{k-1}+R_k)/2.
inline bool twoPeriodAdmissible(double rPrev, double rCur, double rTwo) {
    const double mid = 0.5 * (rPrev + rCur);
    const double lo = std::min(rPrev, mid);
    const double hi = std::max(rPrev, mid);
    return rTwo > lo && rTwo < hi;
}

/// Invert the Rtilde definition to rebuild defaultable bonds from the tilde
/// rates and the default-free forward rates:
///   Pbar_{j-1} / Pbar_j = (alpha_j Rtilde_j / LGD + 1) (1 + alpha_j F_j(0)),
/// applied inductively from Pbar(0,T_0) = basePbar.
inline std::vector<double> pbarFromTildeRates(const std::vector<double>& rtilde,
                                              const DiscountCurve& d, double lgd,
                                              double basePbar) {
    const TenorGrid& grid = d.grid();
    const std::size_t n = grid.periods();
    if (rtilde.size() < n + 1)
        throw ValidationError("tilde rates must cover the full grid");
    std::vector<double> pbar(n + 1);
    pbar[0] = basePbar;
    for (std::size_t j = 1; j <= n; ++j) {
        const double alpha = grid.alpha(j);
        const double fwd = (d.value(j - 1) / d.value(j) - 1.0) / alpha; // forward LIBOR
        const double ratio = (alpha * rtilde[j] / lgd + 1.0) * (1.0 + alpha * fwd);
        if (ratio <= 1.0)
            throw ValidationError("bond ratio not above one at index " + std::to_string(j));
        pbar[j] = pbar[j - 1] / ratio;
    }
    return pbar;
}

/// Reconstruct Pbar(0,T_i) for i >= baseIdx from one- and two-period rates:
///   Pbar_i = Pbar_{i-1} * alpha_{i-1} (R_{i-1} - R_{i-2,i}) / (alpha_i (R_{i-2,i} - R_i))
/// Entries below baseIdx are NaN.
inline std::vector<double> pbarFromRates(const RateSet& rates, double basePbar,
                                         std::size_t baseIdx = 1) {
    if (!rates.hasTwoPeriod())
        throw ValidationError("two-period rates required to reconstruct bonds");
    const TenorGrid& grid = *rates.grid;
    const std::size_t n = grid.periods();
    if (baseIdx < 1 || baseIdx > n)
        throw ValidationError("base index out of range");
    std::vector<double> pbar(n + 1, std::numeric_limits<double>::quiet_NaN());
    pbar[baseIdx] = basePbar;
    for (std::size_t i = baseIdx + 1; i <= n; ++i) {
        const double denom = rates.twoPeriod[i] - rates.onePeriod[i];
        if (std::abs(denom) < 1e-14)
            throw NumericalError("two-period and one-period rates coincide at index " +
                                 std::to_string(i));
        const double ratio = grid.alpha(i - 1) * (rates.onePeriod[i - 1] - rates.twoPeriod[i]) /
                             (grid.alpha(i) * denom);
        pbar[i] = pbar[i - 1] * ratio;
        if (!(pbar[i] > 0.0))
            throw ValidationError("reconstructed defaultable bond not positive at index " +
                                  std::to_string(i));
    }
    return pbar;
}

} // namespace cmcds
