#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cmcds/hazard.hpp"
#include "cmcds/rates.hpp"
#include "fixtures.hpp"

using namespace cmcds;
using testfix::kLgd;

TEST(PricePrcds, ParRateZeroesTheContract) {
    const auto& data = testfix::fiat();
    const auto& d = *data.discount;
    const auto& s = *data.survival;
    for (auto [a, b] : std::vector<std::pair<std::size_t, std::size_t>>{
             {0, 4}, {0, 20}, {3, 9}, {19, 41}}) {
        const double par = forwardCdsRate(d, s, a, b, kLgd);
        EXPECT_NEAR(pricePrcds(d, s, a, b, par, kLgd), 0.0, 1e-15);
    }
}

TEST(PricePrcds, NoDefaultMeansPurePremiumAnnuity) {
    auto synth = testfix::makeSynthetic(8, 0.25, 0.03, 0.0); // Q == 1
    EXPECT_GT(pricePrcds(synth.discount, synth.survival, 0, 8, 0.02, kLgd), 0.0);
}

TEST(PricePrcds, OneYearFiatMidIsNearPar) {
    // the bundled curve was stripped from this quote; direct evaluation of the
    // sums leaves only a sub-basis-point residual
    const auto& data = testfix::fiat();
    const double pv = pricePrcds(*data.discount, *data.survival, 0, 4, 137.735e-4, kLgd);
    EXPECT_LT(std::abs(pv), 5e-6);
}

TEST(PricePrcds, InvalidWindowRejected) {
    const auto& data = testfix::fiat();
    EXPECT_THROW(pricePrcds(*data.discount, *data.survival, 4, 4, 0.01, kLgd), ValidationError);
    EXPECT_THROW(pricePrcds(*data.discount, *data.survival, 0, 99, 0.01, kLgd), ValidationError);
}

TEST(StripHazard, ParRoundTripAtQuoteMaturities) {
    const auto& data = testfix::fiat();
    const auto& quotes = testfix::fiatQuotes();
    const auto res = stripHazard(*data.discount, data.grid, quotes, data.survival->value(0));

    const auto idx = quoteGridIndices(*data.grid, quotes);
    for (std::size_t k = 0; k < quotes.size(); ++k) {
        const double pv = pricePrcds(*data.discount, res.survival, 0, idx[k], quotes.mid(k), kLgd);
        EXPECT_LT(std::abs(pv), 1e-10) << "maturity index " << idx[k];
    }
    // induced survival curve is monotone by construction
    for (std::size_t i = 1; i < res.survival.values().size(); ++i)
        EXPECT_LE(res.survival.value(i), res.survival.value(i - 1));
}

TEST(StripHazard, FiatLambdasRegression) {
    const auto& data = testfix::fiat();
    const auto res = stripHazard(*data.discount, data.grid, testfix::fiatQuotes(),
                                 data.survival->value(0));
    const std::vector<double> expected{0.022890547699179337, 0.04472762024778565,
                                       0.06719143153708465,  0.08850384791027457,
                                       0.0884421454068258,   0.07309904743901216};
    ASSERT_EQ(res.hazard.lambdas().size(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k)
        EXPECT_NEAR(res.hazard.lambdas()[k], expected[k], 1e-9);
    EXPECT_NEAR(res.survival.value(20), 0.7288180393496324, 1e-9);
}

TEST(StripHazard, RecoversAPiecewiseConstantHazardCurveExactly) {
    // a curve that really is piecewise-constant-hazard is recovered at every
    // grid point from its own par rates
    const auto& data = testfix::fiat();
    const auto& d = *data.discount;
    const auto grid = data.grid;
    const std::vector<std::size_t> idx{4, 8, 12, 20, 28, 40};
    const std::vector<double> lambdas{0.02, 0.045, 0.07, 0.09, 0.085, 0.07};
    std::vector<double> knots{grid->time(0)};
    for (std::size_t b : idx)
        knots.push_back(grid->time(b));
    const HazardCurve source(knots, lambdas, 1.0);
    const auto sourceCurve = source.onGrid(grid);

    CdsQuoteSet q;
    q.recovery = 0.4;
    for (std::size_t b : idx) {
        const double par = forwardCdsRate(d, sourceCurve, 0, b, kLgd);
        q.maturities.push_back(grid->time(b));
        q.bidBps.push_back(par * 1e4);
        q.askBps.push_back(par * 1e4);
    }
    const auto res = stripHazard(d, grid, q, 1.0);
    for (std::size_t i = 0; i < grid->times().size(); ++i)
        EXPECT_NEAR(res.survival.value(i), sourceCurve.value(i), 1e-9) << "grid point " << i;
}

TEST(StripHazard, ParRoundTripOnCurveImpliedQuotes) {
    // quotes computed from the published curve re-strip to a curve that
    // reprices them; the survival values themselves depend on the
    // interpolation scheme between the pillars
    const auto& data = testfix::fiat();
    const auto& d = *data.discount;
    const auto& s = *data.survival;
    const std::vector<std::size_t> idx{4, 8, 12, 20, 28, 40};
    CdsQuoteSet q;
    q.recovery = 0.4;
    for (std::size_t b : idx) {
        const double par = forwardCdsRate(d, s, 0, b, kLgd);
        q.maturities.push_back(data.grid->time(b));
        q.bidBps.push_back(par * 1e4);
        q.askBps.push_back(par * 1e4);
    }
    const auto res = stripHazard(d, data.grid, q, s.value(0));
    for (std::size_t k = 0; k < q.size(); ++k)
        EXPECT_LT(std::abs(pricePrcds(d, res.survival, 0, idx[k], q.mid(k), kLgd)), 1e-10);
}

TEST(StripHazard, ZeroSpreadMeansZeroHazard) {
    const auto& data = testfix::fiat();
    CdsQuoteSet q;
    q.recovery = 0.4;
    q.maturities = {data.grid->time(8)};
    q.bidBps = {0.0};
    q.askBps = {0.0};
    const auto res = stripHazard(*data.discount, data.grid, q, 0.99);
    // bisection resolves lambda to 1e-12; over the 10y grid that bounds the
    // survival deviation by ~1e-11
    EXPECT_NEAR(res.hazard.lambdas()[0], 0.0, 1e-12);
    for (double v : res.survival.values())
        EXPECT_NEAR(v, 0.99, 2e-11);
}

TEST(StripHazard, DoubledQuotesRaiseEveryHazard) {
    const auto& data = testfix::fiat();
    const auto& quotes = testfix::fiatQuotes();
    CdsQuoteSet doubled = quotes;
    for (std::size_t k = 0; k < doubled.size(); ++k) {
        doubled.bidBps[k] *= 2.0;
        doubled.askBps[k] *= 2.0;
    }
    const auto base = stripHazard(*data.discount, data.grid, quotes);
    const auto bumped = stripHazard(*data.discount, data.grid, doubled);
    for (std::size_t k = 0; k < base.hazard.lambdas().size(); ++k)
        EXPECT_GT(bumped.hazard.lambdas()[k], base.hazard.lambdas()[k]);
}

TEST(StripHazard, MonotoneResponseToSingleQuoteBump) {
    const auto& data = testfix::fiat();
    const auto& quotes = testfix::fiatQuotes();
    const auto base = stripHazard(*data.discount, data.grid, quotes);
    for (std::size_t bumpAt = 0; bumpAt < quotes.size(); ++bumpAt) {
        CdsQuoteSet q = quotes;
        q.bidBps[bumpAt] += 5.0;
        q.askBps[bumpAt] += 5.0;
        const auto bumped = stripHazard(*data.discount, data.grid, q);
        for (std::size_t k = bumpAt; k < base.hazard.lambdas().size(); ++k) {
            // hazards at or after the bumped maturity never decrease
            EXPECT_GE(bumped.hazard.lambdas()[k], base.hazard.lambdas()[k] - 1e-12)
                << "bump " << bumpAt << " segment " << k;
        }
        EXPECT_GT(bumped.hazard.lambdas()[bumpAt], base.hazard.lambdas()[bumpAt]);
    }
}

TEST(StripHazard, NegativeImpliedHazardReported) {
    const auto& data = testfix::fiat();
    CdsQuoteSet q;
    q.recovery = 0.4;
    q.maturities = {data.grid->time(4), data.grid->time(8)};
    q.bidBps = {300.0, 10.0}; // 2y spread far below 1y: second segment would need lambda < 0
    q.askBps = {300.0, 10.0};
    EXPECT_THROW(stripHazard(*data.discount, data.grid, q), NumericalError);
}

TEST(HazardCurve, SurvivalEvaluation) {
    HazardCurve h({0.0, 1.0, 2.0}, {0.1, 0.2}, 1.0);
    EXPECT_DOUBLE_EQ(h.survival(0.0), 1.0);
    EXPECT_NEAR(h.survival(0.5), std::exp(-0.05), 1e-15);
    EXPECT_NEAR(h.survival(1.0), std::exp(-0.1), 1e-15);
    EXPECT_NEAR(h.survival(2.0), std::exp(-0.3), 1e-15);
    EXPECT_NEAR(h.survival(3.0), std::exp(-0.5), 1e-15); // flat extrapolation
    EXPECT_THROW(h.survival(-1.0), ValidationError);
    EXPECT_THROW(HazardCurve({0.0, 1.0}, {-0.1}), ValidationError);
}
