#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "cmcds/mc_dual.hpp"
#include "cmcds/mc_single.hpp"
#include "fixtures.hpp"

using namespace cmcds;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Three-period toy state with well-separated rates and admissible
/// two-period values.
struct Toy {
    std::shared_ptr<const TenorGrid> grid;
    RateSet rates;
};

Toy makeToy() {
    Toy t;
    t.grid = std::make_shared<const TenorGrid>(std::vector<double>{0.0, 0.25, 0.5, 0.75});
    t.rates.grid = t.grid;
    t.rates.onePeriod = {kNan, 0.02, 0.03, 0.045};
    t.rates.onePeriodTilde = t.rates.onePeriod;
    // intervals: (0.02, 0.025) and (0.03, 0.0375)
    t.rates.twoPeriod = {kNan, kNan, 0.023, 0.034};
    return t;
}

/// Non-flat correlation blocks; theta deliberately asymmetric to pin down the
/// (Z index, V index) orientation.
DualModelParams makeToyParams() {
    DualModelParams p;
    p.sigma = {0.0, 0.3, 0.25, 0.2};
    p.nu = {0.0, 0.0, 0.15, 0.1};
    p.lgd = 0.6;
    p.rho = Matrix::identity(4);
    p.eta = Matrix::identity(4);
    p.theta = Matrix(4, 4, 0.0);
    const double rho12 = 0.85, rho13 = 0.7, rho23 = 0.9;
    p.rho(1, 2) = p.rho(2, 1) = rho12;
    p.rho(1, 3) = p.rho(3, 1) = rho13;
    p.rho(2, 3) = p.rho(3, 2) = rho23;
    const double eta23 = 0.8;
    p.eta(2, 3) = p.eta(3, 2) = eta23;
    // theta(i,k) = d<Z_i, V_k>: rows Z, columns V
    p.theta(1, 2) = 0.40;
    p.theta(1, 3) = 0.30;
    p.theta(2, 2) = 0.55;
    p.theta(2, 3) = 0.35;
    p.theta(3, 2) = 0.25;
    p.theta(3, 3) = 0.60;
    return p;
}

} // namespace

TEST(DualFamilyDrifts, MatchesTermByTermOracle) {
    // independent transcription of the displayed drift sums, evaluated for
    // measure index 1 on the three-period toy state
    const auto toy = makeToy();
    const auto p = makeToyParams();
    const auto& r = toy.rates.onePeriod;
    const auto& r2 = toy.rates.twoPeriod;
    const std::size_t istar = 1;

    const auto drifts =
        dualFamilyDrifts(r, r2, p.sigma, p.nu, p, istar, *toy.grid);

    // mu for h = 2,3:  mubar_m^{i,h} with m = h
    for (std::size_t h = 2; h <= 3; ++h) {
        double mubar = 0.0;
        for (std::size_t k = istar + 1; k <= h; ++k) {
            mubar += -(p.rho(k - 1, h) * p.sigma[k - 1] * r[k - 1] -
                       p.theta(h, k) * p.nu[k] * r2[k]) /
                     (r[k - 1] - r2[k]);
            mubar += (p.theta(h, k) * p.nu[k] * r2[k] - p.rho(k, h) * p.sigma[k] * r[k]) /
                     (r2[k] - r[k]);
        }
        EXPECT_NEAR(drifts.mu[h], p.sigma[h] * mubar, 1e-15) << "h=" << h;
    }
    EXPECT_DOUBLE_EQ(drifts.mu[istar], 0.0); // own measure

    // phi for jj = 2,3: k-sum to jj-1 plus the closing two terms
    for (std::size_t jj = 2; jj <= 3; ++jj) {
        double phibar = 0.0;
        for (std::size_t k = istar + 1; k + 1 <= jj; ++k) {
            phibar += -(p.theta(k - 1, jj) * p.sigma[k - 1] * r[k - 1] -
                        p.eta(jj, k) * p.nu[k] * r2[k]) /
                      (r[k - 1] - r2[k]);
            phibar += (p.eta(jj, k) * p.nu[k] * r2[k] - p.theta(k, jj) * p.sigma[k] * r[k]) /
                      (r2[k] - r[k]);
        }
        phibar += -(p.theta(jj - 1, jj) * p.sigma[jj - 1] * r[jj - 1] -
                    p.theta(jj, jj) * p.sigma[jj] * r[jj]) /
                  (r[jj - 1] - r[jj]);
        phibar += (p.eta(jj, jj) * p.nu[jj] * r2[jj] - p.theta(jj, jj) * p.sigma[jj] * r[jj]) /
                  (r2[jj] - r[jj]);
        EXPECT_NEAR(drifts.phi[jj], p.nu[jj] * phibar, 1e-15) << "jj=" << jj;
    }
}

TEST(DualFamilyDrifts, MeasureShiftsAreConsistent) {
    // moving between measures adds the same shift to a component's drift no
    // matter which measure pair brackets it:
    // (drift under m1 - drift under m2) + (drift under m2 - drift under m3)
    // must equal (drift under m1 - drift under m3) exactly, and the own-measure
    // component is always driftless
    const auto toy = makeToy();
    const auto p = makeToyParams();
    const auto& r = toy.rates.onePeriod;
    const auto& r2 = toy.rates.twoPeriod;
    const auto d1 = dualFamilyDrifts(r, r2, p.sigma, p.nu, p, 1, *toy.grid);
    const auto d2 = dualFamilyDrifts(r, r2, p.sigma, p.nu, p, 2, *toy.grid);
    const auto d3 = dualFamilyDrifts(r, r2, p.sigma, p.nu, p, 3, *toy.grid);
    EXPECT_DOUBLE_EQ(d1.mu[1], 0.0);
    EXPECT_DOUBLE_EQ(d2.mu[2], 0.0);
    EXPECT_DOUBLE_EQ(d3.mu[3], 0.0);
    for (std::size_t h = 1; h <= 3; ++h)
        EXPECT_NEAR((d1.mu[h] - d2.mu[h]) + (d2.mu[h] - d3.mu[h]), d1.mu[h] - d3.mu[h], 1e-15);
    for (std::size_t jj = 2; jj <= 3; ++jj)
        EXPECT_NEAR((d1.phi[jj] - d2.phi[jj]) + (d2.phi[jj] - d3.phi[jj]),
                    d1.phi[jj] - d3.phi[jj], 1e-15);

    // the shift of component h between measures equals the sign-flipped shift
    // of the reverse move, scaled by the same volatility
    for (std::size_t h = 1; h <= 3; ++h) {
        const double shift12 = d1.mu[h] - d2.mu[h];
        const double shift21 = d2.mu[h] - d1.mu[h];
        EXPECT_NEAR(shift12, -shift21, 1e-16);
    }
}

TEST(DualFamilyDrifts, AllVolsZeroMeansAllDriftsZero) {
    const auto toy = makeToy();
    auto p = makeToyParams();
    p.sigma.assign(4, 0.0);
    p.nu.assign(4, 0.0);
    const auto d = dualFamilyDrifts(toy.rates.onePeriod, toy.rates.twoPeriod, p.sigma, p.nu, p, 2,
                                    *toy.grid);
    for (std::size_t h = 1; h <= 3; ++h)
        EXPECT_DOUBLE_EQ(d.mu[h], 0.0);
    for (std::size_t jj = 2; jj <= 3; ++jj)
        EXPECT_DOUBLE_EQ(d.phi[jj], 0.0);
}

TEST(DualFamilyDrifts, DegenerateGapsReported) {
    const auto toy = makeToy();
    const auto p = makeToyParams();
    auto r = toy.rates.onePeriod;
    auto r2 = toy.rates.twoPeriod;
    r2[2] = r[2]; // R_{0,2} == R_2
    EXPECT_THROW(dualFamilyDrifts(r, r2, p.sigma, p.nu, p, 1, *toy.grid), NumericalError);
}

TEST(SimulateDualFamily, ZeroVolsKeepPathsConstant) {
    const auto toy = makeToy();
    auto p = makeToyParams();
    p.sigma.assign(4, 0.0);
    p.nu.assign(4, 0.0);
    SimConfig cfg;
    cfg.paths = 300;
    cfg.measure = 1;
    cfg.stepsPerPeriod = 2;
    const auto res = simulateDualFamily(toy.rates, p, cfg, 2);
    for (std::size_t k = 1; k <= 3; ++k) {
        EXPECT_DOUBLE_EQ(res.terminalR[k].mean(), toy.rates.onePeriod[k]);
        EXPECT_DOUBLE_EQ(res.terminalR[k].stderror(), 0.0);
    }
    for (std::size_t k = 2; k <= 3; ++k)
        EXPECT_DOUBLE_EQ(res.terminalR2[k].mean(), toy.rates.twoPeriod[k]);
    EXPECT_EQ(res.breachedPaths, 0u);
}

TEST(SimulateDualFamily, OwnMeasureRateIsMartingale) {
    const auto toy = makeToy();
    auto p = makeToyParams();
    SimConfig cfg;
    cfg.paths = 20000;
    cfg.measure = 2;
    cfg.stepsPerPeriod = 4;
    cfg.seed = 5;
    cfg.breachCeiling = 1.0;
    const auto res = simulateDualFamily(toy.rates, p, cfg, 1);
    EXPECT_NEAR(res.terminalR[2].mean(), toy.rates.onePeriod[2],
                3.0 * res.terminalR[2].stderror());
}

TEST(SimulateDualFamily, FrozenTwoPeriodSmallVolMatchesSingleFamily) {
    // nu = 0 freezes the two-period rates; with small sigma the dual drifts
    // are near their frozen values and the R statistics must agree with a
    // single-family run of matched sigma/rho within combined 3 SE
    auto grid = std::make_shared<const TenorGrid>(std::vector<double>{0.0, 0.25, 0.5});
    RateSet rates;
    rates.grid = grid;
    rates.onePeriod = {kNan, 0.02, 0.06};
    rates.onePeriodTilde = rates.onePeriod;
    rates.twoPeriod = {kNan, kNan, 0.034}; // inside (0.02, 0.04)

    const double sigma = 0.005, rho = 0.9;
    DualModelParams dual = flatDualParams(2, sigma, 0.0, rho, 0.0, 0.0, 0.6);
    SimConfig cfg;
    cfg.paths = 10000;
    cfg.measure = 1;
    cfg.stepsPerPeriod = 4;
    cfg.seed = 77;
    const auto dres = simulateDualFamily(rates, dual, cfg, 1);
    EXPECT_LT(dres.breachRate, 0.01);

    const auto single = flatParams(2, sigma, rho, 0.6);
    SimConfig scfg = cfg;
    scfg.seed = 78; // independent draws; compare statistically
    const auto sres = simulateSingleFamily(rates, single, scfg, 1, 1, 2);

    for (std::size_t k = 1; k <= 2; ++k) {
        const double se = std::hypot(dres.terminalR[k].stderror(), sres.se(k));
        EXPECT_NEAR(dres.terminalR[k].mean(), sres.mean(k), 3.0 * se) << "k=" << k;
    }
    // frozen rates really are frozen
    EXPECT_DOUBLE_EQ(dres.terminalR2[2].mean(), 0.034);
    EXPECT_DOUBLE_EQ(dres.terminalR2[2].stderror(), 0.0);
}

TEST(SimulateDualFamily, UncorrelatedFamiliesShowNoCrossCorrelation) {
    // theta = 0, identity rho/eta on two periods: Z and V shocks independent,
    // so log-increment cross correlation sits at zero within 3 SE; a positive
    // theta moves it to theta
    auto grid = std::make_shared<const TenorGrid>(std::vector<double>{0.0, 0.25, 0.5});
    RateSet rates;
    rates.grid = grid;
    rates.onePeriod = {kNan, 0.02, 0.06};
    rates.onePeriodTilde = rates.onePeriod;
    rates.twoPeriod = {kNan, kNan, 0.03};

    for (double theta : {0.0, 0.5}) {
        DualModelParams p = flatDualParams(2, 0.2, 0.2, 0.0, 0.0, theta, 0.6);
        SimConfig cfg;
        cfg.paths = 30000;
        cfg.measure = 1;
        cfg.stepsPerPeriod = 1;
        cfg.seed = 99;
        cfg.breachCeiling = 1.0;
        const auto res = simulateDualFamily(rates, p, cfg, 1);

        // recompute per-path increments to correlate (same seed, same draws)
        double s1 = 0.0, s2 = 0.0, s11 = 0.0, s22 = 0.0, s12 = 0.0;
        const Matrix c = choleskyLower(totalCorrelation(p, 2));
        for (std::size_t pth = 0; pth < cfg.paths; ++pth) {
            NormalStream rng(cfg.seed, cfg.stream, static_cast<std::uint32_t>(pth));
            rng.startStep(0);
            double xi[3], eps[3];
            for (auto& v : xi)
                v = rng.next();
            for (int d = 0; d < 3; ++d) {
                eps[d] = 0.0;
                for (int k = 0; k <= d; ++k)
                    eps[d] += c(d, k) * xi[k];
            }
            const double dz = eps[0]; // log R_1 increment shock
            const double dv = eps[2]; // log R2_2 increment shock
            s1 += dz;
            s2 += dv;
            s11 += dz * dz;
            s22 += dv * dv;
            s12 += dz * dv;
        }
        const double n = static_cast<double>(cfg.paths);
        const double corr = (s12 / n - s1 / n * s2 / n) /
                            std::sqrt((s11 / n - s1 / n * s1 / n) * (s22 / n - s2 / n * s2 / n));
        EXPECT_NEAR(corr, theta, 3.0 * (1.0 - theta * theta) / std::sqrt(n));
        (void)res;
    }
}

TEST(SimulateDualFamily, BreachHandling) {
    // two-period value hugging the upper end of its interval plus a large nu:
    // proposals frequently leave the interval
    auto grid = std::make_shared<const TenorGrid>(std::vector<double>{0.0, 0.25, 0.5});
    RateSet rates;
    rates.grid = grid;
    rates.onePeriod = {kNan, 0.02, 0.06};
    rates.onePeriodTilde = rates.onePeriod;
    rates.twoPeriod = {kNan, kNan, 0.0399};

    DualModelParams p = flatDualParams(2, 0.05, 1.5, 0.0, 0.0, 0.0, 0.6);
    SimConfig cfg;
    cfg.paths = 2000;
    cfg.measure = 1;
    cfg.stepsPerPeriod = 2;
    cfg.seed = 123;

    // absorb mode: flagged paths, no abort with a high ceiling
    cfg.breachMode = BreachMode::Absorb;
    cfg.breachCeiling = 1.0;
    const auto absorbed = simulateDualFamily(rates, p, cfg, 1);
    EXPECT_GT(absorbed.breachedPaths, 0u);

    // reject mode with retries shrinks the breach rate
    cfg.breachMode = BreachMode::Reject;
    cfg.maxRetries = 100;
    const auto rejected = simulateDualFamily(rates, p, cfg, 1);
    EXPECT_LT(rejected.breachRate, absorbed.breachRate);
    EXPECT_GT(rejected.totalRetries, 0u);

    // a tiny ceiling aborts with a diagnostic
    cfg.breachMode = BreachMode::Absorb;
    cfg.breachCeiling = 1e-9;
    EXPECT_THROW(simulateDualFamily(rates, p, cfg, 1), NumericalError);
}

TEST(SimulateDualFamily, InadmissibleInitialStateRejected) {
    auto grid = std::make_shared<const TenorGrid>(std::vector<double>{0.0, 0.25, 0.5});
    RateSet rates;
    rates.grid = grid;
    rates.onePeriod = {kNan, 0.02, 0.06};
    rates.onePeriodTilde = rates.onePeriod;
    rates.twoPeriod = {kNan, kNan, 0.05}; // outside (0.02, 0.04)
    DualModelParams p = flatDualParams(2, 0.1, 0.1, 0.5, 0.5, 0.2, 0.6);
    SimConfig cfg;
    cfg.paths = 10;
    cfg.measure = 1;
    EXPECT_THROW(simulateDualFamily(rates, p, cfg, 1), ValidationError);
}

TEST(SimulateDualFamily, WindowStatisticsFrozenVsExactWeights) {
    const auto toy = makeToy();
    auto p = makeToyParams();
    p.sigma = {0.0, 0.05, 0.05, 0.05};
    p.nu = {0.0, 0.0, 0.02, 0.02};
    // defaultable bonds consistent with a gently decreasing curve
    std::vector<double> pbar{1.0, 0.97, 0.94, 0.91};
    SimConfig cfg;
    cfg.paths = 20000;
    cfg.measure = 1;
    cfg.stepsPerPeriod = 2;
    cfg.seed = 31;
    cfg.breachCeiling = 1.0;
    const auto res = simulateDualFamily(toy.rates, p, cfg, 1, 0, 3, pbar);
    ASSERT_GT(res.windowFrozen.n, 0u);
    ASSERT_GT(res.windowExact.n, 0u);

    // at time zero both weightings reduce to the same forward rate
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i <= 3; ++i) {
        const double w = toy.grid->alpha(i) * pbar[i];
        num += w * toy.rates.onePeriod[i];
        den += w;
    }
    const double r03 = num / den;
    // small vols over one quarter: both estimates near the initial rate, and
    // near each other
    EXPECT_NEAR(res.windowFrozen.mean(), r03, 5e-4);
    EXPECT_NEAR(res.windowExact.mean(), r03, 5e-4);
    EXPECT_NEAR(res.windowFrozen.mean(), res.windowExact.mean(),
                3.0 * std::hypot(res.windowFrozen.stderror(), res.windowExact.stderror()) +
                    1e-4);
}
