#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cmcds/errors.hpp"
#include "cmcds/matrix.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

/// Which first index the instantaneous correlation carries inside the
/// change-of-measure drift of Rtilde_i under measure j: the published formula
/// prints rho_{j,k}, the derivation's shock index gives rho_{i,k}.  Flat
/// correlations cannot tell the two apart.
enum class DriftCorrIndex { Measure, Rate };

/// Lognormal one-period rate dynamics: per-rate volatilities (index 1..N),
/// instantaneous correlations, and the loss-given-default entering the
/// drift denominators.  sigmaPeriod, when non-empty, makes volatility
/// piecewise-constant in time: sigmaPeriod(k, m) applies to rate k on
/// (T_{m-1}, T_m].
struct ModelParams {
    std::vector<double> sigma; // size N+1, entry 0 unused
    Matrix rho;                // (N+1) x (N+1), indexed by rate
    double lgd = 0.6;
    DriftCorrIndex driftCorrIndex = DriftCorrIndex::Measure;
    Matrix sigmaPeriod; // optional, (N+1) x (N+1): rate x period

    bool timeVaryingSigma() const { return !sigmaPeriod.empty(); }

    double sigmaOf(std::size_t k) const { return sigma.at(k); }
    double rhoOf(std::size_t i, std::size_t j) const { return rho(i, j); }

    /// int_0^{T_{jIdx-1}} sigma_i(u) sigma_k(u) du; exact for the
    /// piecewise-constant specification, T_{j-1} sigma_i sigma_k otherwise.
    double sigmaCovIntegral(std::size_t i, std::size_t k, std::size_t jIdx,
                            const TenorGrid& grid) const {
        if (!timeVaryingSigma())
            return grid.time(jIdx - 1) * sigma.at(i) * sigma.at(k);
        double acc = 0.0;
        for (std::size_t m = 1; m < jIdx; ++m)
            acc += grid.alpha(m) * sigmaPeriod(i, m) * sigmaPeriod(k, m);
        return acc;
    }

    void validate(std::size_t periods) const {
        if (sigma.size() < periods + 1)
            throw ValidationError("volatility vector does not cover the grid");
        for (std::size_t k = 1; k <= periods; ++k)
            if (sigma[k] < 0.0)
                throw ValidationError("negative volatility at index " + std::to_string(k));
        if (rho.rows() < periods + 1)
            throw ValidationError("correlation matrix does not cover the grid");
        if (lgd <= 0.0 || lgd > 1.0)
            throw ValidationError("loss given default must lie in (0,1]");
    }
};

/// Broadcast scalar volatility/correlation across the grid.
inline ModelParams flatParams(std::size_t periods, double sigma, double rho, double lgd) {
    ModelParams p;
    p.sigma.assign(periods + 1, sigma);
    p.sigma[0] = 0.0;
    p.rho = Matrix::flatCorrelation(periods + 1, rho);
    p.lgd = lgd;
    return p;
}

/// Protection window (T_a, T_b] paying the (c+1)-period constant maturity
/// rate R_{j-1,j+c}(T_{j-1}) at each T_j.
struct CmcdsSpec {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t c = 1;

    void validate(const TenorGrid& grid) const {
        if (a >= b)
            throw ValidationError("CMCDS window needs a < b");
        if (c < 1)
            throw ValidationError("constant maturity extension c must be >= 1");
        if (b + c > grid.periods())
            throw ValidationError("CMCDS window exhausts the grid: b + c = " +
                                  std::to_string(b + c) + " > " +
                                  std::to_string(grid.periods()));
    }
};

} // namespace cmcds
