#pragma once

// File ingestion for the two input layouts:
//   grid_curve.csv : alpha,T,P[,Q]   one row per grid date, increasing T
//   quotes.csv     : maturity_years,bid_bps,ask_bps

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmcds/csv.hpp"
#include "cmcds/curves.hpp"
#include "cmcds/errors.hpp"
#include "cmcds/tenor_grid.hpp"

namespace cmcds {

/// Spot CDS quotes in basis points for a set of grid maturities.
struct CdsQuoteSet {
    std::vector<double> maturities; // grid times, strictly increasing
    std::vector<double> bidBps;
    std::vector<double> askBps;
    double recovery = 0.0;

    std::size_t size() const { return maturities.size(); }
    double midBps(std::size_t k) const { return 0.5 * (bidBps.at(k) + askBps.at(k)); }
    /// Mid quote as a pure number (1 bp = 1e-4).
    double mid(std::size_t k) const { return midBps(k) * 1e-4; }
    double lgd() const { return 1.0 - recovery; }

    void validate() const {
        if (recovery < 0.0 || recovery >= 1.0)
            throw ValidationError("recovery must lie in [0,1)");
        for (std::size_t k = 0; k < maturities.size(); ++k) {
            if (bidBps[k] > askBps[k])
                throw ValidationError("bid above ask at maturity " +
                                      std::to_string(maturities[k]));
            if (k > 0 && maturities[k] <= maturities[k - 1])
                throw ValidationError("quote maturities not strictly increasing");
        }
    }
};

struct MarketDataConfig {
    /// Tolerance for |alpha_i - (T_i - T_{i-1})|.  Published tables round both
    /// columns to a handful of digits, hence the loose default.
    double accrualTolerance = 5e-4;
};

struct GridCurveData {
    std::shared_ptr<const TenorGrid> grid;
    std::optional<DiscountCurve> discount;
    std::optional<SurvivalCurve> survival;
};

inline GridCurveData loadGridCurve(const std::string& path, const MarketDataConfig& cfg = {}) {
    const auto table = csv::readFile(path);
    const int cAlpha = table.column("alpha");
    const int cT = table.column("T");
    const int cP = table.column("P");
    const int cQ = table.column("Q");
    if (cAlpha < 0 || cT < 0 || cP < 0)
        throw ParseError(path, 1, "expected header alpha,T,P[,Q]");

    std::vector<double> alphas, times, ps, qs;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.lineNumbers[r];
        alphas.push_back(csv::parseDouble(row[cAlpha], path, line));
        times.push_back(csv::parseDouble(row[cT], path, line));
        ps.push_back(csv::parseDouble(row[cP], path, line));
        if (cQ >= 0) qs.push_back(csv::parseDouble(row[cQ], path, line));
    }
    if (times.size() < 2)
        throw ValidationError(path + ": need at least two grid rows");

    // first row's alpha is a filler (no accrual ends at T_0)
    std::vector<double> accruals(alphas.begin() + 1, alphas.end());
    auto grid = std::make_shared<const TenorGrid>(std::move(times), std::move(accruals),
                                                  cfg.accrualTolerance);

    GridCurveData out;
    out.grid = grid;
    out.discount.emplace(grid, std::move(ps));
    if (cQ >= 0) out.survival.emplace(grid, std::move(qs));
    return out;
}

inline CdsQuoteSet loadQuotes(const std::string& path, double recovery) {
    const auto table = csv::readFile(path);
    const int cM = table.column("maturity_years");
    const int cB = table.column("bid_bps");
    const int cA = table.column("ask_bps");
    if (cM < 0 || cB < 0 || cA < 0)
        throw ParseError(path, 1, "expected header maturity_years,bid_bps,ask_bps");

    CdsQuoteSet q;
    q.recovery = recovery;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.lineNumbers[r];
        q.maturities.push_back(csv::parseDouble(row[cM], path, line));
        q.bidBps.push_back(csv::parseDouble(row[cB], path, line));
        q.askBps.push_back(csv::parseDouble(row[cA], path, line));
    }
    q.validate();
    return q;
}

inline void writeGridCurve(const std::string& path, const TenorGrid& grid,
                           const DiscountCurve& discount, const SurvivalCurve* survival) {
    csv::Writer w(path);
    if (survival)
        w.row({"alpha", "T", "P", "Q"});
    else
        w.row({"alpha", "T", "P"});
    const std::size_t n = grid.times().size();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i == 0 ? 0.0 : grid.alpha(i);
        std::vector<std::string> fields{csv::formatDouble(a), csv::formatDouble(grid.time(i)),
                                        csv::formatDouble(discount.value(i))};
        if (survival) fields.push_back(csv::formatDouble(survival->value(i)));
        w.row(fields);
    }
}

/// Map each quote maturity to its grid index; throws if one is not a grid date.
inline std::vector<std::size_t> quoteGridIndices(const TenorGrid& grid, const CdsQuoteSet& quotes,
                                                 double tol = 1e-3) {
    std::vector<std::size_t> idx;
    idx.reserve(quotes.size());
    for (double m : quotes.maturities) {
        const int i = grid.indexOf(m, tol);
        if (i <= 0)
            throw ValidationError("quote maturity " + std::to_string(m) +
                                  " is not a grid date");
        idx.push_back(static_cast<std::size_t>(i));
    }
    return idx;
}

} // namespace cmcds
