#pragma once

// Constant Maturity CDS valuation under the one-period CDS market model:
// the premium leg replaces each reset's expected constant-maturity rate by a
// weighted average of convexity-adjusted one-period rate expectations, with
// weights frozen at time 0.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cmcds/errors.hpp"
#include "cmcds/model_params.hpp"
#include "cmcds/rates.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

/// Frozen weight wbar_i^j(0) = alpha_i Pbar_i / sum_{h=j}^{j+c} alpha_h Pbar_h.
inline double frozenWeight(const std::vector<double>& pbar, const TenorGrid& grid, std::size_t i,
                           std::size_t j, std::size_t c) {
    double den = 0.0;
    for (std::size_t h = j; h <= j + c; ++h)
        den += grid.alpha(h) * pbar[h];
    return grid.alpha(i) * pbar[i] / den;
}

/// Forward rate over (T_a, T_b] as the weighted average of one-period rates,
/// identical to the protection/premium leg ratio at time 0.
inline double weightedForwardRate(const std::vector<double>& onePeriod,
                                  const std::vector<double>& pbar, const TenorGrid& grid,
                                  std::size_t a, std::size_t b) {
    if (a >= b || b > grid.periods())
        throw ValidationError("invalid rate window [" + std::to_string(a) + "," +
                              std::to_string(b) + "]");
    double num = 0.0, den = 0.0;
    for (std::size_t i = a + 1; i <= b; ++i) {
        const double w = grid.alpha(i) * pbar[i];
        num += w * onePeriod[i];
        den += w;
    }
    return num / den;
}

/// Exponent of the convexity adjustment on E^{j-1,j}[Rtilde_i(T_{j-1})]:
///   sum_{k=j+1}^{i} rho_{j,k} * (int_0^{T_{j-1}} sigma_i sigma_k du)
///                 * Rtilde_k(0) / (Rtilde_k(0) + LGD/alpha_k)
/// Empty for i = j.  The correlation's first index follows
/// params.driftCorrIndex (printed formula: the measure index j).
inline double adjustmentExponent(const RateSet& rates, const ModelParams& params, std::size_t i,
                                 std::size_t j, const TenorGrid& grid) {
    if (j > i || j < 1)
        throw ValidationError("adjustment needs 1 <= j <= i");
    const std::size_t corrBase = params.driftCorrIndex == DriftCorrIndex::Measure ? j : i;
    double acc = 0.0;
    for (std::size_t k = j + 1; k <= i; ++k) {
        const double rt = rates.onePeriodTilde[k];
        acc += params.rhoOf(corrBase, k) * params.sigmaCovIntegral(i, k, j, grid) * rt /
               (rt + params.lgd / grid.alpha(k));
    }
    return acc;
}

/// E^{j-1,j}[Rtilde_i(T_{j-1})] under the frozen lognormal dynamics.
inline double adjustedExpectation(const RateSet& rates, const ModelParams& params, std::size_t i,
                                  std::size_t j, const TenorGrid& grid) {
    return rates.onePeriodTilde[i] * std::exp(adjustmentExponent(rates, params, i, j, grid));
}

/// Expected constant-maturity rate paid at T_j: weighted average of adjusted
/// one-period expectations over the (c+1)-period window starting at j.
inline double adjustedLeg(const RateSet& rates, const ModelParams& params, std::size_t j,
                          std::size_t c, const std::vector<double>& pbar, const TenorGrid& grid) {
    double den = 0.0, num = 0.0;
    for (std::size_t h = j; h <= j + c; ++h)
        den += grid.alpha(h) * pbar[h];
    for (std::size_t i = j; i <= j + c; ++i)
        num += grid.alpha(i) * pbar[i] * adjustedExpectation(rates, params, i, j, grid);
    return num / den;
}

/// Present value to the protection seller of the CMCDS:
/// sum_j alpha_j Pbar_j { sum_i wbar_i^j(0) E^{j-1,j}[Rtilde_i(T_{j-1})] - R_j(0) }.
/// The subtracted one-period rates use the independence identity R_j = Rtilde_j.
inline double cmcdsPv(const RateSet& rates, const ModelParams& params, const CmcdsSpec& spec,
                      const std::vector<double>& pbar, const TenorGrid& grid) {
    spec.validate(grid);
    params.validate(grid.periods());
    double pv = 0.0;
    for (std::size_t j = spec.a + 1; j <= spec.b; ++j) {
        const double leg = adjustedLeg(rates, params, j, spec.c, pbar, grid);
        pv += grid.alpha(j) * pbar[j] * (leg - rates.onePeriodTilde[j]);
    }
    return pv;
}

/// Zero-correlation value: sum_j alpha_j Pbar_j (R_{j-1,j+c}(0) - R_{j-1,j}(0)).
inline double cmcdsPvNoRho(const RateSet& rates, const CmcdsSpec& spec,
                           const std::vector<double>& pbar, const TenorGrid& grid) {
    spec.validate(grid);
    double pv = 0.0;
    for (std::size_t j = spec.a + 1; j <= spec.b; ++j) {
        const double cm = weightedForwardRate(rates.onePeriodTilde, pbar, grid, j - 1, j + spec.c);
        pv += grid.alpha(j) * pbar[j] * (cm - rates.onePeriodTilde[j]);
    }
    return pv;
}

/// Ratio of the standard CDS premium leg over the CMCDS premium leg for the
/// same window; the convexity-adjusted flavour uses the adjusted expectations.
inline double participationRate(const RateSet& rates, const ModelParams& params,
                                const CmcdsSpec& spec, const std::vector<double>& pbar,
                                const TenorGrid& grid, bool withConvexity = true) {
    spec.validate(grid);
    const double standardRate =
        weightedForwardRate(rates.onePeriodTilde, pbar, grid, spec.a, spec.b);
    double annuity = 0.0, cmLeg = 0.0;
    for (std::size_t j = spec.a + 1; j <= spec.b; ++j) {
        const double w = grid.alpha(j) * pbar[j];
        annuity += w;
        const double leg =
            withConvexity
                ? adjustedLeg(rates, params, j, spec.c, pbar, grid)
                : weightedForwardRate(rates.onePeriodTilde, pbar, grid, j - 1, j + spec.c);
        cmLeg += w * leg;
    }
    if (cmLeg == 0.0)
        throw NumericalError("zero CMCDS premium leg");
    return standardRate * annuity / cmLeg;
}

struct MaturityRow {
    std::size_t i = 0;
    double x = 0.0;   // R_{i-1,i+c}(0) / R_{0,b}(0)
    double y = 0.0;   // adjusted expected paid rate / R_{0,b}(0)
    double z = 0.0;   // adjusted expected paid rate / R_{i-1,i+c}(0)
    double psi = 0.0; // participation up to T_i without convexity
    double phi = 0.0; // participation up to T_i with convexity
};

/// Per-maturity diagnostics with the standard-rate denominator fixed at
/// R_{0,bMax}(0).
inline std::vector<MaturityRow> maturityTable(const RateSet& rates, const ModelParams& params,
                                              std::size_t c, std::size_t bMax,
                                              const std::vector<double>& pbar,
                                              const TenorGrid& grid) {
    CmcdsSpec full{0, bMax, c};
    full.validate(grid);
    params.validate(grid.periods());
    const double r0b = weightedForwardRate(rates.onePeriodTilde, pbar, grid, 0, bMax);

    std::vector<MaturityRow> rows;
    rows.reserve(bMax);
    double annuity = 0.0, cmLegPlain = 0.0, cmLegAdj = 0.0;
    for (std::size_t i = 1; i <= bMax; ++i) {
        MaturityRow row;
        row.i = i;
        const double cmRate = weightedForwardRate(rates.onePeriodTilde, pbar, grid, i - 1, i + c);
        const double adj = adjustedLeg(rates, params, i, c, pbar, grid);
        row.x = cmRate / r0b;
        row.y = adj / r0b;
        row.z = adj / cmRate;

        const double w = grid.alpha(i) * pbar[i];
        annuity += w;
        cmLegPlain += w * cmRate;
        cmLegAdj += w * adj;
        const double standardRate = weightedForwardRate(rates.onePeriodTilde, pbar, grid, 0, i);
        row.psi = standardRate * annuity / cmLegPlain;
        row.phi = standardRate * annuity / cmLegAdj;
        rows.push_back(row);
    }
    return rows;
}

} // namespace cmcds
