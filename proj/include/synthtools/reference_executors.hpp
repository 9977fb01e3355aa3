#pragma once

#include "synthtools/jsonio.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace synthtools::sim {

// Deterministic executors for two well-known fixture tools. They back test
// fixtures and the offline provider; the simulation contract itself never
// depends on them.

// European option pricing with continuous dividend yield. Arguments:
// option_type, underlying_price, strike_price, time_to_expiration,
// risk_free_rate, volatility, dividend_yield. Returns option_price plus
// the standard sensitivities.
Json black_scholes_execute(const std::map<std::string, Json>& arguments);

// Return-refund arithmetic with component-wise cent rounding. Shipping is
// refunded only when the returned items plus tax plus shipping add up to
// the full original order total.
Json refund_calculator_execute(const std::map<std::string, Json>& arguments);

using ReferenceExecutor = std::function<Json(const std::map<std::string, Json>&)>;

// Lookup by normalized tool name; empty when no reference implementation
// exists for the tool.
std::optional<ReferenceExecutor> reference_executor_for(const std::string& normalized_name);

}  // namespace synthtools::sim
