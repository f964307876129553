#pragma once

// Shared helpers for loading the bundled FIAT market-data fixtures.

#include <memory>
#include <string>
#include <vector>

#include "cmcds/curves.hpp"
#include "cmcds/market_data.hpp"

namespace testfix {

inline std::string dataDir() { return CMCDS_DATA_DIR; }

inline const cmcds::GridCurveData& fiat() {
    static const cmcds::GridCurveData data =
        cmcds::loadGridCurve(dataDir() + "/fiat_grid_curve.csv");
    return data;
}

inline const cmcds::CdsQuoteSet& fiatQuotes() {
    static const cmcds::CdsQuoteSet quotes =
        cmcds::loadQuotes(dataDir() + "/fiat_quotes.csv", 0.4);
    return quotes;
}

constexpr double kLgd = 0.6;

/// Flat synthetic curve pair on a small regular grid, handy for edge cases.
struct Synthetic {
    std::shared_ptr<const cmcds::TenorGrid> grid;
    cmcds::DiscountCurve discount;
    cmcds::SurvivalCurve survival;
};

inline Synthetic makeSynthetic(std::size_t periods, double alpha, double flatRate,
                               double hazard) {
    std::vector<double> times;
    for (std::size_t i = 0; i <= periods; ++i)
        times.push_back(alpha * static_cast<double>(i));
    auto grid = std::make_shared<const cmcds::TenorGrid>(times);
    std::vector<double> p, q;
    for (double t : times) {
        p.push_back(std::exp(-flatRate * t));
        q.push_back(std::exp(-hazard * t));
    }
    cmcds::DiscountCurve d(grid, p);
    cmcds::SurvivalCurve s(grid, q);
    return {grid, std::move(d), std::move(s)};
}

} // namespace testfix
