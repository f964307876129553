#pragma once

// Joint dynamics of one-period rates R_k and two-period rates R_{k-2,k} under
// a single defaultable-annuity measure.  The change-of-measure drifts follow
// from the representation of annuity ratios through
//   ratio_k = (R_{k-1} - R_{k-2,k}) / (R_{k-2,k} - R_k),
// so every drift is a sum of terms in the rates and the correlation blocks
// rho (Z-Z), eta (V-V) and theta (Z-V).  Two-period rates live inside the
// open interval between R_{k-1} and the midpoint (R_{k-1}+R_k)/2, which keeps
// reconstructed defaultable bonds positive and decreasing; proposals breaching
// the interval are rejected and resampled (or absorbed and flagged).

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmcds/cholesky.hpp"
#include "cmcds/errors.hpp"
#include "cmcds/matrix.hpp"
#include "cmcds/rates.hpp"
#include "cmcds/rng.hpp"
#include "cmcds/sim_config.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

/// State-dependent two-period volatility hook nu_k(t; R); the default uses the
/// constant per-index values.
using NuFunction = std::function<double(std::size_t k, double t, const std::vector<double>& r)>;

struct DualModelParams {
    std::vector<double> sigma; // one-period vols, size N+1, index 1..N
    std::vector<double> nu;    // two-period vols, size N+1, index 2..N
    Matrix rho;                // Z-Z correlations, (N+1)^2
    Matrix eta;                // V-V correlations, (N+1)^2
    Matrix theta;              // theta(i,k) = d<Z_i, V_k>/dt, (N+1)^2
    double lgd = 0.6;
    NuFunction nuFn;           // optional override of nu

    double nuAt(std::size_t k, double t, const std::vector<double>& r) const {
        return nuFn ? nuFn(k, t, r) : nu.at(k);
    }

    void validate(std::size_t periods) const {
        if (sigma.size() < periods + 1 || nu.size() < periods + 1)
            throw ValidationError("volatility vectors do not cover the grid");
        if (rho.rows() < periods + 1 || eta.rows() < periods + 1 || theta.rows() < periods + 1)
            throw ValidationError("correlation blocks do not cover the grid");
        if (lgd <= 0.0 || lgd > 1.0)
            throw ValidationError("loss given default must lie in (0,1]");
    }
};

/// Flat-parameter construction: common sigma/nu and flat correlation levels.
inline DualModelParams flatDualParams(std::size_t periods, double sigma, double nu, double rho,
                                      double eta, double theta, double lgd) {
    DualModelParams p;
    p.sigma.assign(periods + 1, sigma);
    p.sigma[0] = 0.0;
    p.nu.assign(periods + 1, nu);
    p.nu[0] = p.nu[1] = 0.0;
    p.rho = Matrix::flatCorrelation(periods + 1, rho);
    p.eta = Matrix::flatCorrelation(periods + 1, eta);
    p.theta = Matrix(periods + 1, periods + 1, theta);
    p.lgd = lgd;
    return p;
}

/// Total correlation of the shock vector [Z_1..Z_N, V_2..V_N].
inline Matrix totalCorrelation(const DualModelParams& params, std::size_t periods) {
    const std::size_t nz = periods;     // Z_1..Z_N
    const std::size_t nv = periods - 1; // V_2..V_N
    Matrix q(nz + nv, nz + nv);
    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < nz; ++j)
            q(i, j) = params.rho(i + 1, j + 1);
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < nv; ++j)
            q(nz + i, nz + j) = params.eta(i + 2, j + 2);
    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < nv; ++j)
            q(i, nz + j) = q(nz + j, i) = params.theta(i + 1, j + 2);
    return q;
}

struct DualDrifts {
    std::vector<double> mu;  // drift rate of R_h, size N+1, index 1..N
    std::vector<double> phi; // drift rate of R_{k-2,k}, size N+1, index 2..N
};

namespace detail {

constexpr double kMinRateGap = 1e-12;

inline void requireGap(double denom, std::size_t k, const char* what) {
    if (std::abs(denom) < kMinRateGap)
        throw NumericalError(std::string("degenerate rate gap (") + what + ") at index " +
                             std::to_string(k));
}

} // namespace detail

/// Drifts of every component under the measure of Chat_{i*-1,i*}, evaluated
/// at the state (r, r2) with the given per-index volatilities sigma/nuVals.
/// Rates are indexed 1..N (r) and 2..N (r2); unused slots are ignored.
inline DualDrifts dualFamilyDrifts(const std::vector<double>& r, const std::vector<double>& r2,
                                   const std::vector<double>& sigma,
                                   const std::vector<double>& nuVals,
                                   const DualModelParams& params, std::size_t measure,
                                   const TenorGrid& grid) {
    const std::size_t n = grid.periods();
    if (measure < 1 || measure > n)
        throw ValidationError("measure index outside grid");

    // minus Q . DC(ln ratio_k) against a target shock: corrZ(x) is the
    // correlation of Z_x with the target, corrV(x) that of V_x.
    auto ratioTerm = [&](std::size_t k, auto&& corrZ, auto&& corrV) {
        const double dNum = r[k - 1] - r2[k];
        const double dDen = r2[k] - r[k];
        detail::requireGap(dNum, k, "R_{k-1} - R_{k-2,k}");
        detail::requireGap(dDen, k, "R_{k-2,k} - R_k");
        return -(corrZ(k - 1) * sigma[k - 1] * r[k - 1] - corrV(k) * nuVals[k] * r2[k]) / dNum +
               (corrV(k) * nuVals[k] * r2[k] - corrZ(k) * sigma[k] * r[k]) / dDen;
    };

    // signed sum of ratio terms carrying the annuity of `target` back to the
    // annuity of the measure index
    auto measureShift = [&](std::size_t target, auto&& corrZ, auto&& corrV) {
        double acc = 0.0;
        if (target > measure)
            for (std::size_t k = measure + 1; k <= target; ++k)
                acc += ratioTerm(k, corrZ, corrV);
        else
            for (std::size_t k = target + 1; k <= measure; ++k)
                acc -= ratioTerm(k, corrZ, corrV);
        return acc;
    };

    DualDrifts out;
    out.mu.assign(n + 1, 0.0);
    out.phi.assign(n + 1, 0.0);

    // one-period components: Chat_{h-1,h} against Chat_{i*-1,i*}
    for (std::size_t h = 1; h <= n; ++h) {
        if (h == measure) continue;
        auto corrZ = [&](std::size_t x) { return params.rho(x, h); };
        auto corrV = [&](std::size_t x) { return params.theta(h, x); };
        out.mu[h] = sigma[h] * measureShift(h, corrZ, corrV);
    }

    // two-period components: Chat_{j-2,j} against Chat_{i*-1,i*}.  The ratio
    // of annuities factors into the ratio_k product down to index j-1 times
    // the closing factor (R_{j-1}-R_j)/(R_{j-2,j}-R_j).
    for (std::size_t jj = 2; jj <= n; ++jj) {
        auto corrZ = [&](std::size_t x) { return params.theta(x, jj); };
        auto corrV = [&](std::size_t x) { return params.eta(x, jj); };

        const double dPair = r[jj - 1] - r[jj];
        const double dTwo = r2[jj] - r[jj];
        detail::requireGap(dPair, jj, "R_{j-1} - R_j");
        detail::requireGap(dTwo, jj, "R_{j-2,j} - R_j");
        double acc =
            -(corrZ(jj - 1) * sigma[jj - 1] * r[jj - 1] - corrZ(jj) * sigma[jj] * r[jj]) / dPair +
            (corrV(jj) * nuVals[jj] * r2[jj] - corrZ(jj) * sigma[jj] * r[jj]) / dTwo;
        acc += measureShift(jj - 1, corrZ, corrV);

        out.phi[jj] = nuVals[jj] * acc;
    }

    return out;
}

/// Interval admissibility of the two-period vector plus the denominator gaps
/// needed by the drifts.
inline bool dualStateAdmissible(const std::vector<double>& r, const std::vector<double>& r2,
                                std::size_t periods) {
    for (std::size_t k = 2; k <= periods; ++k) {
        if (!twoPeriodAdmissible(r[k - 1], r[k], r2[k])) return false;
        if (std::abs(r[k - 1] - r2[k]) < detail::kMinRateGap) return false;
        if (std::abs(r2[k] - r[k]) < detail::kMinRateGap) return false;
        if (std::abs(r[k - 1] - r[k]) < detail::kMinRateGap) return false;
    }
    return true;
}

struct DualFamilyResult {
    std::vector<SampleStats> terminalR;  // size N+1, index 1..N
    std::vector<SampleStats> terminalR2; // size N+1, index 2..N
    std::size_t breachedPaths = 0;       // paths that exhausted resampling at least once
    std::size_t totalRetries = 0;
    double breachRate = 0.0;
    SampleStats windowFrozen; // CM rate over the window with weights frozen at 0
    SampleStats windowExact;  // CM rate with exact weights from the rate state
};

/// Simulate the joint vector to T_horizonIdx under the measure cfg.measure.
/// If windowA < windowB, the constant-maturity rate R_{windowA,windowB}(T) is
/// accumulated both with frozen weights (pbar required) and with exact
/// weights reconstructed from the simulated rates.
inline DualFamilyResult simulateDualFamily(const RateSet& rates, const DualModelParams& params,
                                           const SimConfig& cfg, std::size_t horizonIdx,
                                           std::size_t windowA = 0, std::size_t windowB = 0,
                                           const std::vector<double>& pbar = {}) {
    cfg.validate();
    const TenorGrid& grid = *rates.grid;
    const std::size_t n = grid.periods();
    params.validate(n);
    if (!rates.hasTwoPeriod())
        throw ValidationError("dual-family simulation needs two-period rates");
    if (horizonIdx >= grid.times().size())
        throw ValidationError("horizon outside grid");
    const bool wantWindow = windowB > windowA;
    if (wantWindow && (windowB > n || pbar.size() < n + 1))
        throw ValidationError("invalid window for constant-maturity statistics");

    if (!dualStateAdmissible(rates.onePeriod, rates.twoPeriod, n))
        throw ValidationError("initial two-period rates violate the admissibility interval");

    const Matrix q = totalCorrelation(params, n);
    const Matrix chol = choleskyLower(q);
    const std::size_t nz = n, dim = 2 * n - 1;

    std::vector<double> frozenWeights;
    if (wantWindow) {
        frozenWeights.assign(windowB - windowA, 0.0);
        double den = 0.0;
        for (std::size_t i = windowA + 1; i <= windowB; ++i)
            den += grid.alpha(i) * pbar[i];
        for (std::size_t i = windowA + 1; i <= windowB; ++i)
            frozenWeights[i - windowA - 1] = grid.alpha(i) * pbar[i] / den;
    }

    const std::size_t batches = (cfg.paths + detail::kBatchSize - 1) / detail::kBatchSize;
    struct BatchOut {
        std::vector<SampleStats> r, r2;
        SampleStats frozen, exact;
        std::size_t breached = 0, retries = 0;
        std::string error;
    };
    std::vector<BatchOut> outs(batches);

    auto runBatch = [&](std::size_t batch, std::size_t begin, std::size_t end) {
        BatchOut& bo = outs[batch];
        bo.r.assign(n + 1, {});
        bo.r2.assign(n + 1, {});
        std::vector<double> logR(n + 1), logR2(n + 1), r(n + 1), r2(n + 1), propR(n + 1),
            propR2(n + 1), nuVals(n + 1), xi(dim), eps(dim);
        try {
            for (std::size_t p = begin; p < end; ++p) {
                NormalStream rng(cfg.seed, cfg.stream, static_cast<std::uint32_t>(p));
                for (std::size_t k = 1; k <= n; ++k) {
                    r[k] = rates.onePeriod[k];
                    logR[k] = std::log(r[k]);
                }
                for (std::size_t k = 2; k <= n; ++k) {
                    r2[k] = rates.twoPeriod[k];
                    logR2[k] = std::log(r2[k]);
                }
                bool breached = false;
                double t = 0.0;
                std::uint32_t stepIdx = 0;
                for (std::size_t m = 1; m <= horizonIdx; ++m) {
                    const double dt = grid.alpha(m) / static_cast<double>(cfg.stepsPerPeriod);
                    const double sqrtDt = std::sqrt(dt);
                    for (std::size_t s = 0; s < cfg.stepsPerPeriod; ++s, ++stepIdx) {
                        rng.startStep(stepIdx);
                        for (std::size_t k = 2; k <= n; ++k)
                            nuVals[k] = params.nuAt(k, t, r);
                        const auto drifts = dualFamilyDrifts(r, r2, params.sigma, nuVals, params,
                                                             cfg.measure, grid);
                        bool accepted = false;
                        for (std::size_t attempt = 0; attempt <= cfg.maxRetries; ++attempt) {
                            for (std::size_t d = 0; d < dim; ++d)
                                xi[d] = rng.next();
                            for (std::size_t d = 0; d < dim; ++d) {
                                double acc = 0.0;
                                for (std::size_t k2 = 0; k2 <= d; ++k2)
                                    acc += chol(d, k2) * xi[k2];
                                eps[d] = acc;
                            }
                            for (std::size_t k = 1; k <= n; ++k) {
                                const double sig = params.sigma[k];
                                propR[k] = std::exp(logR[k] +
                                                    (drifts.mu[k] - 0.5 * sig * sig) * dt +
                                                    sig * sqrtDt * eps[k - 1]);
                            }
                            for (std::size_t k = 2; k <= n; ++k) {
                                const double nv = nuVals[k];
                                propR2[k] = std::exp(logR2[k] +
                                                     (drifts.phi[k] - 0.5 * nv * nv) * dt +
                                                     nv * sqrtDt * eps[nz + k - 2]);
                            }
                            if (dualStateAdmissible(propR, propR2, n)) {
                                accepted = true;
                                break;
                            }
                            ++bo.retries;
                            if (cfg.breachMode == BreachMode::Absorb) break;
                        }
                        if (!accepted) breached = true;
                        for (std::size_t k = 1; k <= n; ++k) {
                            r[k] = propR[k];
                            logR[k] = std::log(r[k]);
                            if (!std::isfinite(r[k]))
                                throw NumericalError("non-finite one-period state on path " +
                                                     std::to_string(p) + " step " +
                                                     std::to_string(stepIdx));
                        }
                        for (std::size_t k = 2; k <= n; ++k) {
                            r2[k] = propR2[k];
                            logR2[k] = std::log(r2[k]);
                            if (!std::isfinite(r2[k]))
                                throw NumericalError("non-finite two-period state on path " +
                                                     std::to_string(p) + " step " +
                                                     std::to_string(stepIdx));
                        }
                        t += dt;
                    }
                }
                if (breached) ++bo.breached;
                for (std::size_t k = 1; k <= n; ++k)
                    bo.r[k].add(r[k]);
                for (std::size_t k = 2; k <= n; ++k)
                    bo.r2[k].add(r2[k]);
                if (wantWindow) {
                    double frozen = 0.0;
                    for (std::size_t i = windowA + 1; i <= windowB; ++i)
                        frozen += frozenWeights[i - windowA - 1] * r[i];
                    bo.frozen.add(frozen);
                    // exact weights: alpha_i Pbar_i(T) up to a common factor,
                    // from the annuity ratio products
                    double wRel = 1.0, num = 0.0, den = 0.0;
                    for (std::size_t i = windowA + 1; i <= windowB; ++i) {
                        if (i > windowA + 1) {
                            const double gNum = r[i - 1] - r2[i];
                            const double gDen = r2[i] - r[i];
                            detail::requireGap(gDen, i, "R_{k-2,k} - R_k");
                            wRel *= gNum / gDen;
                        }
                        num += wRel * r[i];
                        den += wRel;
                    }
                    bo.exact.add(num / den);
                }
            }
        } catch (const std::exception& e) {
            bo.error = e.what();
        }
    };

    detail::forEachBatch(cfg.paths, cfg.workerCount(), runBatch);

    DualFamilyResult result;
    result.terminalR.assign(n + 1, {});
    result.terminalR2.assign(n + 1, {});
    for (auto& bo : outs) {
        if (!bo.error.empty())
            throw NumericalError(bo.error);
        for (std::size_t k = 1; k <= n; ++k)
            result.terminalR[k].merge(bo.r[k]);
        for (std::size_t k = 2; k <= n; ++k)
            result.terminalR2[k].merge(bo.r2[k]);
        result.windowFrozen.merge(bo.frozen);
        result.windowExact.merge(bo.exact);
        result.breachedPaths += bo.breached;
        result.totalRetries += bo.retries;
    }
    result.breachRate = static_cast<double>(result.breachedPaths) /
                        static_cast<double>(cfg.paths);
    if (result.breachRate > cfg.breachCeiling)
        throw NumericalError("admissibility breach rate " + std::to_string(result.breachRate) +
                             " above ceiling " + std::to_string(cfg.breachCeiling));
    return result;
}

} // namespace cmcds
