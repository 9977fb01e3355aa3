#include "synthtools/stresstest.hpp"

#include <algorithm>
#include <cmath>

namespace synthtools::stress {

using sim::Metadata;
using sim::ToolCall;
using sim::ToolResponse;
using toolspec::BaseKind;
using toolspec::ParameterSpec;
using toolspec::ToolSpec;
using toolspec::ValueKind;

Json StressCall::to_json() const {
    Json doc{{"call", call.to_json()}, {"mode", mode}, {"note", note}};
    if (expected_failure) doc["expected_failure"] = expected_failure->to_json();
    if (!expected_bindings.empty()) {
        Json bindings = Json::object();
        for (const auto& [key, value] : expected_bindings) bindings[key] = value;
        doc["expected_bindings"] = bindings;
    }
    return doc;
}

StressCall StressCall::from_json(const Json& doc) {
    StressCall stress;
    stress.call = ToolCall::from_json(doc.at("call"));
    stress.mode = doc.value("mode", 1);
    stress.note = doc.value("note", "");
    if (doc.contains("expected_failure")) {
        stress.expected_failure = ToolResponse::from_json(doc.at("expected_failure"));
    }
    if (doc.contains("expected_bindings")) {
        for (auto it = doc.at("expected_bindings").begin(); it != doc.at("expected_bindings").end();
             ++it) {
            stress.expected_bindings.emplace(it.key(), it.value());
        }
    }
    return stress;
}

std::string verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Correct: return "correct";
        case Verdict::Incorrect: return "incorrect";
        case Verdict::Unjudged: return "unjudged";
    }
    return "unjudged";
}

namespace {

Verdict verdict_from_name(const std::string& name) {
    if (name == "correct") return Verdict::Correct;
    if (name == "incorrect") return Verdict::Incorrect;
    return Verdict::Unjudged;
}

}  // namespace

std::map<int, std::map<Verdict, int>> SuiteResult::counts_by_mode() const {
    std::map<int, std::map<Verdict, int>> counts;
    for (const auto& entry : per_call) {
        ++counts[entry.stress.mode][entry.verdict];
    }
    return counts;
}

int SuiteResult::count(Verdict verdict) const {
    int n = 0;
    for (const auto& entry : per_call) {
        if (entry.verdict == verdict) ++n;
    }
    return n;
}

Json SuiteResult::to_json() const {
    Json calls = Json::array();
    for (const auto& entry : per_call) {
        calls.push_back(Json{{"stress", entry.stress.to_json()},
                             {"response", entry.response.to_json()},
                             {"verdict", verdict_name(entry.verdict)}});
    }
    return Json{{"tool_name", tool_name}, {"per_call", calls}};
}

SuiteResult SuiteResult::from_json(const Json& doc) {
    SuiteResult result;
    result.tool_name = doc.value("tool_name", "");
    for (const auto& entry : doc.at("per_call")) {
        result.per_call.push_back({StressCall::from_json(entry.at("stress")),
                                   ToolResponse::from_json(entry.at("response")),
                                   verdict_from_name(entry.value("verdict", "unjudged"))});
    }
    return result;
}

namespace {

const char* kSampleWords[] = {"summary", "standard", "primary", "metro",  "atlas",
                              "pilot",   "baseline", "field",   "branch", "delta"};

bool is_id_like(const std::string& name) {
    return name.ends_with("_id") || name.ends_with("_ids");
}

// The metadata table this argument draws keys from, if any.
const sim::MetadataTable* referenced_table(const std::string& argument_name,
                                           const Metadata& metadata) {
    for (const auto& [table_name, table] : metadata.tables) {
        if (sim::argument_names_table_key(argument_name, table_name, table) &&
            !table.records.empty()) {
            return &table;
        }
    }
    return nullptr;
}

std::string synthetic_id(const std::string& argument_name, rng::SplitMix64& rng) {
    std::string stem = argument_name;
    if (stem.ends_with("_ids")) stem = stem.substr(0, stem.size() - 4);
    if (stem.ends_with("_id")) stem = stem.substr(0, stem.size() - 3);
    std::string upper;
    for (char c : stem) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    // Reserved prefix guarantees absence from any metadata table.
    return "ZZZ-" + upper + "-" + std::to_string(100 + rng.bounded(900));
}

Json scalar_value(const ToolSpec&, const ParameterSpec& param, const Metadata& metadata,
                  bool known_input, rng::SplitMix64& rng) {
    const auto& c = param.constraints;
    if (!c.enum_values.empty()) {
        return c.enum_values[rng.bounded(c.enum_values.size())];
    }
    switch (param.kind.base) {
        case BaseKind::String: {
            if (c.format && *c.format == "iso8601-datetime") {
                int month = 1 + static_cast<int>(rng.bounded(12));
                int day = 1 + static_cast<int>(rng.bounded(28));
                char buf[32];
                std::snprintf(buf, sizeof(buf), "2024-%02d-%02dT10:15:30Z", month, day);
                return std::string(buf);
            }
            if (c.format && *c.format == "iso8601-date") {
                int month = 1 + static_cast<int>(rng.bounded(12));
                int day = 1 + static_cast<int>(rng.bounded(28));
                char buf[16];
                std::snprintf(buf, sizeof(buf), "2024-%02d-%02d", month, day);
                return std::string(buf);
            }
            if (is_id_like(param.name)) {
                if (known_input) {
                    if (const auto* table = referenced_table(param.name, metadata)) {
                        const auto& record = table->records[rng.bounded(table->records.size())];
                        return record.at(table->key_field);
                    }
                }
                return synthetic_id(param.name, rng);
            }
            return std::string(kSampleWords[rng.bounded(std::size(kSampleWords))]);
        }
        case BaseKind::Integer: {
            double lo = c.min.value_or(1);
            double hi = c.max.value_or(lo + 99);
            return static_cast<std::int64_t>(lo + rng.bounded(
                       static_cast<std::uint64_t>(std::max(1.0, hi - lo + 1))));
        }
        case BaseKind::Number: {
            double lo = c.min.value_or(0.0);
            double hi = c.max.value_or(lo + 100.0);
            double v = lo + (hi - lo) * rng.uniform01();
            return std::round(v * 100.0) / 100.0;
        }
        case BaseKind::Boolean:
            return rng.bounded(2) == 0;
    }
    return Json();
}

Json synth_value(const ToolSpec& spec, const ParameterSpec& param, const Metadata& metadata,
                 bool known_input, rng::SplitMix64& rng) {
    if (!param.kind.is_array) {
        return scalar_value(spec, param, metadata, known_input, rng);
    }
    std::size_t count = std::max<std::size_t>(param.constraints.min_items.value_or(1), 1);
    Json out = Json::array();
    ParameterSpec element = param;
    element.kind.is_array = false;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(scalar_value(spec, element, metadata, known_input, rng));
    }
    return out;
}

// Arrays tied by a same_length rule are regenerated to a common length so
// the base call passes validation.
void enforce_cross_rules(const ToolSpec& spec, ToolCall& call) {
    for (const auto& rule : spec.cross_field_rules) {
        if (rule.kind != toolspec::RuleKind::SameLength || rule.params.size() < 2) continue;
        auto a = call.arguments.find(rule.params[0]);
        auto b = call.arguments.find(rule.params[1]);
        if (a == call.arguments.end() || b == call.arguments.end()) continue;
        if (!a->second.is_array() || !b->second.is_array()) continue;
        while (b->second.size() < a->second.size()) b->second.push_back(b->second.back());
        while (b->second.size() > a->second.size()) b->second.erase(b->second.size() - 1);
    }
}

}  // namespace

ToolCall build_valid_call(const ToolSpec& spec, const Metadata& metadata, bool known_input,
                          rng::SplitMix64& rng) {
    ToolCall call;
    call.tool_name = spec.name;
    for (const auto& param : spec.parameters) {
        if (!param.required) continue;
        call.arguments[param.name] = synth_value(spec, param, metadata, known_input, rng);
    }
    enforce_cross_rules(spec, call);
    return call;
}

namespace {

ToolResponse expect_fail(std::string message) {
    return ToolResponse::fail(400, std::move(message));
}

void add_schema_failures(const ToolSpec& spec, const ToolCall& base,
                         std::vector<StressCall>& suite, rng::SplitMix64& rng) {
    int added = 0;
    // Drop one required parameter.
    for (const auto& param : spec.parameters) {
        if (!param.required) continue;
        StressCall stress;
        stress.call = base;
        stress.call.arguments.erase(param.name);
        stress.mode = 1;
        stress.expected_failure = expect_fail(sim::messages::missing_required(param.name));
        stress.note = "dropped required parameter " + param.name;
        suite.push_back(std::move(stress));
        ++added;
        break;
    }
    // Flip one parameter to a mismatched kind.
    for (const auto& param : spec.parameters) {
        auto it = base.arguments.find(param.name);
        if (it == base.arguments.end()) continue;
        StressCall stress;
        stress.call = base;
        stress.call.arguments[param.name] =
            param.kind.base == BaseKind::String && !param.kind.is_array ? Json(12345)
                                                                        : Json("not-the-right-kind");
        stress.mode = 1;
        stress.expected_failure = expect_fail(sim::messages::kind_mismatch(param));
        stress.note = "wrong kind for " + param.name;
        suite.push_back(std::move(stress));
        ++added;
        break;
    }
    // Pad with unknown arguments until this mode has two calls.
    const char* extras[] = {"unexpected_argument", "unsupported_option"};
    for (int i = 0; added < 2 && i < 2; ++i, ++added) {
        StressCall stress;
        stress.call = base;
        stress.call.arguments[extras[i]] = std::string(kSampleWords[rng.bounded(4)]);
        stress.mode = 1;
        stress.expected_failure = expect_fail(sim::messages::unknown_parameter(extras[i]));
        stress.note = std::string("unknown argument ") + extras[i];
        suite.push_back(std::move(stress));
    }
}

void add_constraint_failures(const ToolSpec& spec, const ToolCall& base,
                             std::vector<StressCall>& suite, std::vector<std::string>* log) {
    std::vector<StressCall> candidates;

    for (const auto& rule : spec.cross_field_rules) {
        if (rule.kind != toolspec::RuleKind::SameLength || rule.params.size() < 2) continue;
        auto a = base.arguments.find(rule.params[0]);
        auto b = base.arguments.find(rule.params[1]);
        if (a == base.arguments.end() || b == base.arguments.end()) continue;
        if (!a->second.is_array() || !b->second.is_array()) continue;
        StressCall stress;
        stress.call = base;
        Json& grow = stress.call.arguments[rule.params[0]];
        grow.push_back(grow.empty() ? Json("extra") : grow.back());
        stress.mode = 2;
        stress.expected_failure = expect_fail(sim::messages::rule_violation(spec, rule));
        stress.note = "length mismatch between " + rule.params[0] + " and " + rule.params[1];
        candidates.push_back(std::move(stress));
    }

    for (const auto& param : spec.parameters) {
        if (!base.arguments.contains(param.name)) continue;
        const auto& c = param.constraints;
        if (c.min_items && *c.min_items >= 1 && param.kind.is_array) {
            StressCall stress;
            stress.call = base;
            stress.call.arguments[param.name] = Json::array();
            stress.mode = 2;
            stress.expected_failure = expect_fail(sim::messages::min_items_violation(spec, param));
            stress.note = "emptied array " + param.name;
            // An emptied array can break a same_length rule first; keep the
            // partner in step so the item-count check is what fires.
            for (const auto& rule : spec.cross_field_rules) {
                if (rule.kind == toolspec::RuleKind::SameLength && rule.params.size() >= 2) {
                    if (rule.params[0] == param.name &&
                        stress.call.arguments.contains(rule.params[1])) {
                        stress.call.arguments[rule.params[1]] = Json::array();
                    } else if (rule.params[1] == param.name &&
                               stress.call.arguments.contains(rule.params[0])) {
                        stress.call.arguments[rule.params[0]] = Json::array();
                    }
                }
            }
            // With both arrays emptied, the first item-count violation in
            // declaration order is the one reported.
            for (const auto& p : spec.parameters) {
                if (!stress.call.arguments.contains(p.name)) continue;
                if (p.constraints.min_items && *p.constraints.min_items >= 1 &&
                    stress.call.arguments[p.name].is_array() &&
                    stress.call.arguments[p.name].empty()) {
                    stress.expected_failure =
                        expect_fail(sim::messages::min_items_violation(spec, p));
                    break;
                }
            }
            candidates.push_back(std::move(stress));
        }
        if (!c.enum_values.empty()) {
            StressCall stress;
            stress.call = base;
            stress.call.arguments[param.name] =
                param.kind.is_array ? Json::array({"not_a_member"}) : Json("not_a_member");
            if (param.kind.base != BaseKind::String) {
                stress.call.arguments[param.name] = param.kind.is_array
                                                        ? Json::array({987654})
                                                        : Json(987654);
            }
            stress.mode = 2;
            stress.expected_failure = expect_fail(sim::messages::enum_violation(spec, param));
            stress.note = "enum violation on " + param.name;
            candidates.push_back(std::move(stress));
        }
        if (c.min && !param.kind.is_array &&
            (param.kind.base == BaseKind::Number || param.kind.base == BaseKind::Integer)) {
            StressCall stress;
            stress.call = base;
            stress.call.arguments[param.name] = *c.min - 1;
            stress.mode = 2;
            stress.expected_failure = expect_fail(sim::messages::min_violation(spec, param));
            stress.note = "below minimum on " + param.name;
            candidates.push_back(std::move(stress));
        }
        if (c.max && !param.kind.is_array &&
            (param.kind.base == BaseKind::Number || param.kind.base == BaseKind::Integer)) {
            StressCall stress;
            stress.call = base;
            stress.call.arguments[param.name] = *c.max + 1;
            stress.mode = 2;
            stress.expected_failure = expect_fail(sim::messages::max_violation(spec, param));
            stress.note = "above maximum on " + param.name;
            candidates.push_back(std::move(stress));
        }
        if (c.format && !param.kind.is_array && param.kind.base == BaseKind::String) {
            StressCall stress;
            stress.call = base;
            stress.call.arguments[param.name] = "not-a-valid-value";
            stress.mode = 2;
            stress.expected_failure = expect_fail(sim::messages::format_violation(spec, param));
            stress.note = "format violation on " + param.name;
            candidates.push_back(std::move(stress));
        }
        if (candidates.size() >= 4) break;
    }

    if (candidates.empty()) {
        if (log) log->push_back("no declared constraints on " + spec.name + "; mode 2 skipped");
        return;
    }
    for (std::size_t i = 0; i < candidates.size() && i < 2; ++i) {
        suite.push_back(std::move(candidates[i]));
    }
}

}  // namespace

std::vector<StressCall> build_stress_suite(const ToolSpec& spec, const Metadata& metadata,
                                           std::uint64_t seed, std::vector<std::string>* log) {
    rng::SplitMix64 rng(rng::derive_seed(seed, toolspec::normalize_name(spec.name)));
    std::vector<StressCall> suite;

    ToolCall base = build_valid_call(spec, metadata, !metadata.tables.empty(), rng);
    add_schema_failures(spec, base, suite, rng);
    add_constraint_failures(spec, base, suite, log);

    for (int i = 0; i < 2; ++i) {
        StressCall stress;
        stress.call = build_valid_call(spec, metadata, false, rng);
        stress.mode = 3;
        stress.note = "new input";
        suite.push_back(std::move(stress));
    }

    bool any_reference = false;
    for (const auto& param : spec.parameters) {
        if (param.required && referenced_table(param.name, metadata)) {
            any_reference = true;
            break;
        }
    }
    if (!any_reference) {
        if (log) {
            log->push_back("metadata has no table keyed by " + spec.name +
                           " arguments; mode 4 skipped");
        }
        return suite;
    }

    std::size_t largest_table = 0;
    for (const auto& [name, table] : metadata.tables) {
        largest_table = std::max(largest_table, table.records.size());
    }
    int known_calls = largest_table >= 3 ? 4 : 2;
    for (int i = 0; i < known_calls; ++i) {
        StressCall stress;
        stress.call = build_valid_call(spec, metadata, true, rng);
        stress.mode = 4;
        auto validation = sim::validate_call(spec, stress.call);
        sim::ToolCall effective = stress.call;
        if (validation.passed) effective.arguments = validation.effective_arguments;
        stress.expected_bindings = sim::derive_known_bindings(spec, effective, metadata);
        stress.note = "known input";
        suite.push_back(std::move(stress));
    }
    return suite;
}

namespace {

bool monetary_field(const ToolSpec& spec, const std::string& field_name) {
    const auto* field = spec.find_output_field(field_name);
    if (!field) return false;
    std::string lower;
    for (char c : field->description) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (const char* marker : {"$", "usd", "dollar", "currency", "monetary"}) {
        if (lower.find(marker) != std::string::npos) return true;
    }
    return false;
}

bool numbers_match(double expected, double actual, bool monetary) {
    if (monetary) {
        return std::round(expected * 100.0) == std::round(actual * 100.0);
    }
    double scale = std::max({1.0, std::abs(expected), std::abs(actual)});
    return std::abs(expected - actual) <= 1e-9 * scale;
}

bool values_match(const ToolSpec& spec, const std::string& field_name, const Json& expected,
                  const Json& actual) {
    if (expected.is_number() && actual.is_number()) {
        return numbers_match(expected.get<double>(), actual.get<double>(),
                             monetary_field(spec, field_name));
    }
    if (expected.is_array() && actual.is_array()) {
        if (expected.size() != actual.size()) return false;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (!values_match(spec, field_name, expected[i], actual[i])) return false;
        }
        return true;
    }
    return expected == actual;
}

}  // namespace

Verdict auto_verify_known(const ToolSpec& spec, const StressCall& stress,
                          const ToolResponse& response, const Metadata&) {
    if (stress.mode != 4) {
        throw std::logic_error("auto_verify_known requires a known-input (mode 4) call");
    }
    if (!response.passed()) return Verdict::Incorrect;
    for (const auto& [field, expected] : stress.expected_bindings) {
        if (!response.return_data.contains(field)) return Verdict::Incorrect;
        if (!values_match(spec, field, expected, response.return_data.at(field))) {
            return Verdict::Incorrect;
        }
    }
    return Verdict::Correct;
}

SuiteResult run_suite(const ToolSpec& spec, const Metadata& metadata, gateway::Gateway& gateway,
                      std::uint64_t seed, const sim::SimOptions& options,
                      std::vector<std::string>* log) {
    SuiteResult result;
    result.tool_name = spec.name;
    auto suite = build_stress_suite(spec, metadata, seed, log);
    for (auto& stress : suite) {
        SuiteResult::PerCall entry;
        entry.stress = stress;
        bool faulted = false;
        try {
            entry.response = sim::simulate(spec, stress.call, metadata, gateway, options);
        } catch (const sim::SimulatorFault& fault) {
            entry.response = ToolResponse::fail(400, std::string("simulator fault: ") + fault.what());
            entry.verdict = Verdict::Incorrect;
            faulted = true;
            if (log) log->push_back("simulator fault on " + spec.name + ": " + fault.what());
        }
        if (!faulted) {
            switch (stress.mode) {
                case 1:
                case 2:
                    entry.verdict = entry.response == *stress.expected_failure
                                        ? Verdict::Correct
                                        : Verdict::Incorrect;
                    break;
                case 3:
                    entry.verdict = Verdict::Unjudged;
                    break;
                case 4:
                    entry.verdict = auto_verify_known(spec, stress, entry.response, metadata);
                    break;
                default:
                    entry.verdict = Verdict::Unjudged;
            }
        }
        result.per_call.push_back(std::move(entry));
    }
    return result;
}

}  // namespace synthtools::stress
