#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tristrat/indicators.hpp"
#include "tristrat/market_data.hpp"
#include "tristrat/portfolio.hpp"

namespace tristrat {

enum class FactorKind { Sma, Macd, Boll };

/// Parses "sma", "macd", "boll".
FactorKind parse_factor_kind(const std::string& name);
const char* to_string(FactorKind kind);

/// 1/N over the whole tradable universe. Exempt from the position cap.
Portfolio equal_weight(int week, const std::vector<StockId>& universe);

/// Factor read from the indicator row of the last trading day on or before
/// `as_of` (the last trading day of the previous week):
///   SMA  close / SMA - 1
///   MACD histogram
///   BOLL %B = (close - lower) / (upper - lower)
/// nullopt when the indicator is still warming up or the band has zero width.
std::optional<double> factor_score(FactorKind kind, Date as_of, const std::vector<IndicatorRow>& rows);

/// `count` highest factors at `weight` each; ties go to the smaller ticker.
Portfolio top_n_portfolio(int week, const std::map<StockId, double>& factors, std::size_t count = 5,
                          double weight = 0.20);

} // namespace tristrat
