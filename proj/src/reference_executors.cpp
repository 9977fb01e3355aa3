#include "synthtools/reference_executors.hpp"

#include <cmath>

namespace synthtools::sim {

namespace {

double arg_number(const std::map<std::string, Json>& args, const std::string& name,
                  double fallback = 0.0) {
    auto it = args.find(name);
    if (it == args.end() || !it->second.is_number()) return fallback;
    return it->second.get<double>();
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

std::string money(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string percent(double rate) {
    double pct = rate * 100.0;
    if (std::floor(pct) == pct) return std::to_string(static_cast<long long>(pct));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", pct);
    return buf;
}

}  // namespace

Json black_scholes_execute(const std::map<std::string, Json>& args) {
    std::string option_type = "call";
    if (auto it = args.find("option_type"); it != args.end() && it->second.is_string()) {
        option_type = it->second.get<std::string>();
    }
    double spot = arg_number(args, "underlying_price");
    double strike = arg_number(args, "strike_price");
    double expiry = arg_number(args, "time_to_expiration");
    double rate = arg_number(args, "risk_free_rate");
    double vol = arg_number(args, "volatility");
    double yield = arg_number(args, "dividend_yield", 0.0);

    double sqrt_t = std::sqrt(expiry);
    double d1 = (std::log(spot / strike) + (rate - yield + 0.5 * vol * vol) * expiry) /
                (vol * sqrt_t);
    double d2 = d1 - vol * sqrt_t;
    double spot_disc = spot * std::exp(-yield * expiry);
    double strike_disc = strike * std::exp(-rate * expiry);

    double price, delta, theta, rho;
    if (option_type == "put") {
        price = strike_disc * normal_cdf(-d2) - spot_disc * normal_cdf(-d1);
        delta = -std::exp(-yield * expiry) * normal_cdf(-d1);
        theta = -spot_disc * normal_pdf(d1) * vol / (2.0 * sqrt_t) +
                rate * strike_disc * normal_cdf(-d2) - yield * spot_disc * normal_cdf(-d1);
        rho = -strike * expiry * std::exp(-rate * expiry) * normal_cdf(-d2);
    } else {
        price = spot_disc * normal_cdf(d1) - strike_disc * normal_cdf(d2);
        delta = std::exp(-yield * expiry) * normal_cdf(d1);
        theta = -spot_disc * normal_pdf(d1) * vol / (2.0 * sqrt_t) -
                rate * strike_disc * normal_cdf(d2) + yield * spot_disc * normal_cdf(d1);
        rho = strike * expiry * std::exp(-rate * expiry) * normal_cdf(d2);
    }
    double gamma = std::exp(-yield * expiry) * normal_pdf(d1) / (spot * vol * sqrt_t);
    double vega = spot_disc * normal_pdf(d1) * sqrt_t;

    return Json{{"option_price", price}, {"delta", delta}, {"gamma", gamma},
                {"theta", theta},        {"vega", vega},   {"rho", rho}};
}

Json refund_calculator_execute(const std::map<std::string, Json>& args) {
    double gross = 0.0;
    if (auto it = args.find("item_values"); it != args.end() && it->second.is_array()) {
        for (const auto& v : it->second) {
            if (v.is_number()) gross += v.get<double>();
        }
    }
    gross = round2(gross);
    double tax_rate = arg_number(args, "tax_rate");
    double shipping_cost = arg_number(args, "shipping_cost");
    double original_total = arg_number(args, "original_order_total");
    double restocking_rate = arg_number(args, "restocking_fee_rate", 0.0);
    double condition_rate = arg_number(args, "condition_deduction_rate", 0.0);
    double return_shipping = arg_number(args, "return_shipping_cost", 0.0);

    double tax_refund = round2(gross * tax_rate);
    bool full_return = round2(gross + tax_refund + shipping_cost) == round2(original_total);
    double shipping_refund = full_return ? round2(shipping_cost) : 0.0;

    double restocking_fee = round2(gross * restocking_rate);
    double condition_fee = round2(gross * condition_rate);
    double deductions = round2(restocking_fee + condition_fee + return_shipping);

    Json breakdown = Json::array();
    if (restocking_fee > 0.0) {
        breakdown.push_back("Restocking Fee (" + percent(restocking_rate) + "%): $" +
                            money(restocking_fee));
    }
    if (condition_fee > 0.0) {
        breakdown.push_back("Condition Deduction (" + percent(condition_rate) + "%): $" +
                            money(condition_fee));
    }
    if (return_shipping > 0.0) {
        breakdown.push_back("Return Shipping: $" + money(return_shipping));
    }

    double net = round2(gross + tax_refund + shipping_refund - deductions);
    return Json{{"gross_refund", gross},
                {"tax_refund", tax_refund},
                {"shipping_refund", shipping_refund},
                {"total_deductions", deductions},
                {"net_refund", net},
                {"deduction_breakdown", breakdown}};
}

std::optional<ReferenceExecutor> reference_executor_for(const std::string& normalized_name) {
    if (normalized_name == "black_scholes_calculator") {
        return ReferenceExecutor(black_scholes_execute);
    }
    if (normalized_name == "refund_calculator") {
        return ReferenceExecutor(refund_calculator_execute);
    }
    return std::nullopt;
}

}  // namespace synthtools::sim
