#pragma once

// Monte Carlo for the single-family model: lognormal one-period rates
// Rtilde_i with the exact state-dependent change-of-measure drift.  The log
// process is simulated with exact diffusion and Euler (or predictor-corrector)
// drift; in log coordinates the Milstein correction vanishes.

#include <cmath>
#include <string>
#include <vector>

#include "cmcds/cholesky.hpp"
#include "cmcds/errors.hpp"
#include "cmcds/model_params.hpp"
#include "cmcds/pricer.hpp"
#include "cmcds/rates.hpp"
#include "cmcds/rng.hpp"
#include "cmcds/sim_config.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

/// Drift rate of Rtilde_i under the measure of Chat_{j-1,j}, evaluated at the
/// current state:  sigma_i * sum_{h=j+1}^{i} rho_{.,h} sigma_h Rtilde_h /
/// (Rtilde_h + LGD/alpha_h).  Zero for i = j.  `period` selects the active
/// volatility bucket when sigma is time-varying.
inline double singleFamilyDrift(const std::vector<double>& rtilde, const ModelParams& params,
                                std::size_t i, std::size_t j, const TenorGrid& grid,
                                std::size_t period = 1) {
    if (j > i)
        throw ValidationError("drift needs measure index j <= rate index i");
    const std::size_t corrBase = params.driftCorrIndex == DriftCorrIndex::Measure ? j : i;
    auto sigmaAt = [&](std::size_t k) {
        return params.timeVaryingSigma() ? params.sigmaPeriod(k, period) : params.sigma[k];
    };
    double acc = 0.0;
    for (std::size_t h = j + 1; h <= i; ++h)
        acc += params.rhoOf(corrBase, h) * sigmaAt(h) * rtilde[h] /
               (rtilde[h] + params.lgd / grid.alpha(h));
    return sigmaAt(i) * acc;
}

struct SingleFamilyResult {
    std::size_t lo = 0, hi = 0;        // simulated rate indices [lo..hi]
    std::size_t horizonIdx = 0;        // terminal date index
    std::vector<SampleStats> terminal; // stats of Rtilde_i(T_horizon), size hi-lo+1
    SampleStats leg;                   // stats of sum_i weight_i Rtilde_i, if weights given

    double mean(std::size_t rateIdx) const { return terminal.at(rateIdx - lo).mean(); }
    double se(std::size_t rateIdx) const { return terminal.at(rateIdx - lo).stderror(); }
};

/// Simulate Rtilde_{lo..hi} under the measure cfg.measure up to T_horizonIdx.
/// `weights`, when non-empty (size hi-lo+1), adds the path functional
/// sum_i weights[i-lo] * Rtilde_i(T) to the statistics.
inline SingleFamilyResult simulateSingleFamily(const RateSet& rates, const ModelParams& params,
                                               const SimConfig& cfg, std::size_t horizonIdx,
                                               std::size_t lo, std::size_t hi,
                                               const std::vector<double>& weights = {}) {
    cfg.validate();
    const TenorGrid& grid = *rates.grid;
    params.validate(grid.periods());
    const std::size_t j = cfg.measure;
    if (j < 1 || j > grid.periods())
        throw ValidationError("measure index outside grid");
    if (lo < 1 || lo > hi || hi > grid.periods())
        throw ValidationError("invalid simulation window");
    if (j < lo)
        throw ValidationError("measure index below simulated window");
    if (horizonIdx >= grid.times().size())
        throw ValidationError("horizon outside grid");
    if (!weights.empty() && weights.size() != hi - lo + 1)
        throw ValidationError("weight vector does not match window");

    const std::size_t dim = hi - lo + 1;
    SingleFamilyResult result;
    result.lo = lo;
    result.hi = hi;
    result.horizonIdx = horizonIdx;
    result.terminal.assign(dim, {});

    // terminal time == 0: deterministic initial state
    if (horizonIdx == 0) {
        for (std::size_t p = 0; p < cfg.paths; ++p) {
            double leg = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double v = rates.onePeriodTilde[lo + d];
                result.terminal[d].add(v);
                if (!weights.empty()) leg += weights[d] * v;
            }
            if (!weights.empty()) result.leg.add(leg);
        }
        return result;
    }

    const Matrix chol = [&] {
        Matrix sub(dim, dim);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                sub(a, b) = params.rhoOf(lo + a, lo + b);
        return choleskyLower(sub);
    }();

    const std::vector<double> initial(rates.onePeriodTilde.begin() + lo,
                                      rates.onePeriodTilde.begin() + hi + 1);
    std::vector<double> kappa(dim); // LGD / alpha_h
    for (std::size_t d = 0; d < dim; ++d)
        kappa[d] = params.lgd / grid.alpha(lo + d);

    const std::size_t batches = (cfg.paths + detail::kBatchSize - 1) / detail::kBatchSize;
    std::vector<std::vector<SampleStats>> batchTerminal(batches, std::vector<SampleStats>(dim));
    std::vector<SampleStats> batchLeg(batches);
    std::vector<std::string> batchError(batches);

    auto runBatch = [&](std::size_t batch, std::size_t begin, std::size_t end) {
        std::vector<double> logR(dim), r(dim), g(dim), drift(dim), drift2(dim), xi(dim), eps(dim),
            predicted(dim);
        auto& term = batchTerminal[batch];
        for (std::size_t p = begin; p < end; ++p) {
            NormalStream rng(cfg.seed, cfg.stream, static_cast<std::uint32_t>(p));
            for (std::size_t d = 0; d < dim; ++d) {
                logR[d] = std::log(initial[d]);
                r[d] = initial[d];
            }
            std::uint32_t stepIdx = 0;
            for (std::size_t m = 1; m <= horizonIdx; ++m) {
                const double dt = grid.alpha(m) / static_cast<double>(cfg.stepsPerPeriod);
                const double sqrtDt = std::sqrt(dt);
                auto sigmaAt = [&](std::size_t k) {
                    return params.timeVaryingSigma() ? params.sigmaPeriod(k, m) : params.sigma[k];
                };
                auto driftAt = [&](const std::vector<double>& state, std::vector<double>& out) {
                    for (std::size_t d = 0; d < dim; ++d)
                        g[d] = sigmaAt(lo + d) * state[d] / (state[d] + kappa[d]);
                    if (params.driftCorrIndex == DriftCorrIndex::Measure) {
                        // rho_{j,h}: one running sum serves every rate
                        double prefix = 0.0;
                        for (std::size_t d = 0; d < dim; ++d) {
                            const std::size_t i = lo + d;
                            if (i > j) prefix += params.rhoOf(j, i) * g[d];
                            out[d] = sigmaAt(i) * prefix;
                        }
                    } else {
                        // rho_{i,h}: row-dependent sums
                        for (std::size_t d = 0; d < dim; ++d) {
                            const std::size_t i = lo + d;
                            double acc = 0.0;
                            for (std::size_t h = j + 1; h <= i; ++h)
                                acc += params.rhoOf(i, h) * g[h - lo];
                            out[d] = sigmaAt(i) * acc;
                        }
                    }
                };

                for (std::size_t s = 0; s < cfg.stepsPerPeriod; ++s, ++stepIdx) {
                    rng.startStep(stepIdx);
                    for (std::size_t d = 0; d < dim; ++d)
                        xi[d] = rng.next();
                    for (std::size_t d = 0; d < dim; ++d) {
                        double acc = 0.0;
                        for (std::size_t k = 0; k <= d; ++k)
                            acc += chol(d, k) * xi[k];
                        eps[d] = acc;
                    }

                    driftAt(r, drift);
                    if (cfg.scheme == Scheme::LogPredictorCorrector) {
                        for (std::size_t d = 0; d < dim; ++d) {
                            const double sig = sigmaAt(lo + d);
                            predicted[d] = std::exp(logR[d] + (drift[d] - 0.5 * sig * sig) * dt +
                                                    sig * sqrtDt * eps[d]);
                        }
                        driftAt(predicted, drift2);
                        for (std::size_t d = 0; d < dim; ++d)
                            drift[d] = 0.5 * (drift[d] + drift2[d]);
                    }
                    for (std::size_t d = 0; d < dim; ++d) {
                        const double sig = sigmaAt(lo + d);
                        logR[d] += (drift[d] - 0.5 * sig * sig) * dt + sig * sqrtDt * eps[d];
                        r[d] = std::exp(logR[d]);
                        if (!std::isfinite(r[d])) {
                            batchError[batch] = "non-finite state on path " + std::to_string(p) +
                                                " step " + std::to_string(stepIdx);
                            return;
                        }
                    }
                }
            }
            double leg = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                term[d].add(r[d]);
                if (!weights.empty()) leg += weights[d] * r[d];
            }
            if (!weights.empty()) batchLeg[batch].add(leg);
        }
    };

    detail::forEachBatch(cfg.paths, cfg.workerCount(), runBatch);

    for (std::size_t b = 0; b < batches; ++b) {
        if (!batchError[b].empty())
            throw NumericalError(batchError[b]);
        for (std::size_t d = 0; d < dim; ++d)
            result.terminal[d].merge(batchTerminal[b][d]);
        result.leg.merge(batchLeg[b]);
    }
    return result;
}

struct PremiumLegMcTerm {
    std::size_t j = 0;
    double formulaLeg = 0.0; // sum_i wbar E^{j-1,j}[Rtilde_i] from the closed form
    double mcLeg = 0.0;
    double mcSe = 0.0;
};

struct PremiumLegMcResult {
    double total = 0.0;   // sum_j alpha_j Pbar_j * mcLeg_j
    double se = 0.0;      // from independent per-measure runs
    double formula = 0.0; // closed-form counterpart
    std::vector<PremiumLegMcTerm> terms;
};

/// Monte Carlo estimate of the CMCDS premium leg: each payment date T_j is
/// simulated under its own measure to T_{j-1} with frozen weights wbar(0),
/// mirroring the closed form term by term.
inline PremiumLegMcResult estimatePremiumLegMc(const RateSet& rates, const ModelParams& params,
                                               const CmcdsSpec& spec, const SimConfig& cfg,
                                               const std::vector<double>& pbar,
                                               const TenorGrid& grid) {
    spec.validate(grid);
    PremiumLegMcResult out;
    double varTotal = 0.0;
    for (std::size_t j = spec.a + 1; j <= spec.b; ++j) {
        std::vector<double> weights(spec.c + 1);
        for (std::size_t i = j; i <= j + spec.c; ++i)
            weights[i - j] = frozenWeight(pbar, grid, i, j, spec.c);

        SimConfig run = cfg;
        run.measure = j;
        run.stream = static_cast<std::uint32_t>(j);
        const auto sim = simulateSingleFamily(rates, params, run, j - 1, j, j + spec.c, weights);

        PremiumLegMcTerm term;
        term.j = j;
        term.mcLeg = sim.leg.mean();
        term.mcSe = sim.leg.stderror();
        term.formulaLeg = adjustedLeg(rates, params, j, spec.c, pbar, grid);
        out.terms.push_back(term);

        const double scale = grid.alpha(j) * pbar[j];
        out.total += scale * term.mcLeg;
        out.formula += scale * term.formulaLeg;
        varTotal += scale * scale * term.mcSe * term.mcSe;
    }
    out.se = std::sqrt(varTotal);
    return out;
}

} // namespace cmcds
