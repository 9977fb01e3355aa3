#include "synthtools/simulator.hpp"

#include "synthtools/reference_executors.hpp"
#include "synthtools/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace synthtools::sim {

using toolspec::BaseKind;
using toolspec::ConstraintSet;
using toolspec::CrossFieldRule;
using toolspec::ParameterSpec;
using toolspec::RuleKind;
using toolspec::ToolSpec;
using toolspec::ValueKind;

Json ToolCall::to_json() const {
    Json args = Json::object();
    for (const auto& [key, value] : arguments) args[key] = value;
    Json doc{{"tool_name", tool_name}, {"arguments", args}};
    if (session) doc["session"] = *session;
    return doc;
}

ToolCall ToolCall::from_json(const Json& doc) {
    ToolCall call;
    call.tool_name = doc.value("tool_name", "");
    if (doc.contains("arguments") && doc.at("arguments").is_object()) {
        for (auto it = doc.at("arguments").begin(); it != doc.at("arguments").end(); ++it) {
            call.arguments.emplace(it.key(), it.value());
        }
    }
    if (doc.contains("session") && doc.at("session").is_string()) {
        call.session = doc.at("session").get<std::string>();
    }
    return call;
}

Json ToolResponse::to_json() const {
    Json doc{{"status", passed() ? "PASS" : "FAIL"}, {"status_code", status_code}};
    if (passed()) {
        doc["return_data"] = return_data;
    } else {
        doc["error_message"] = error_message;
    }
    return doc;
}

ToolResponse ToolResponse::from_json(const Json& doc) {
    ToolResponse response;
    bool pass = doc.value("status", "PASS") == "PASS";
    response.status = pass ? Status::Pass : Status::Fail;
    response.status_code = doc.value("status_code", pass ? 200 : 400);
    if (pass) {
        response.return_data = doc.value("return_data", Json::object());
    } else {
        response.error_message = doc.value("error_message", "");
        response.return_data = Json::object();
    }
    return response;
}

ToolResponse ToolResponse::pass(Json data) {
    ToolResponse response;
    response.status = Status::Pass;
    response.status_code = 200;
    response.return_data = std::move(data);
    return response;
}

ToolResponse ToolResponse::fail(int code, std::string message) {
    ToolResponse response;
    response.status = Status::Fail;
    response.status_code = code;
    response.error_message = std::move(message);
    return response;
}

bool envelope_well_formed(const ToolResponse& response) {
    if (response.passed()) {
        return response.status_code == 200 && response.error_message.empty() &&
               response.return_data.is_object();
    }
    return (response.status_code == 400 || response.status_code == 404) &&
           !response.error_message.empty() &&
           (response.return_data.is_object() && response.return_data.empty());
}

std::string generation_mode_name(GenerationMode mode) {
    return mode == GenerationMode::DataGeneration ? "data_generation" : "information_deduction";
}

namespace {

std::string render_number(double value) {
    if (std::floor(value) == value && std::abs(value) < 9.007199254740992e15) {
        return std::to_string(static_cast<std::int64_t>(value));
    }
    return Json(value).dump();
}

std::string render_value(const Json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_float()) return render_number(value.get<double>());
    return value.dump();
}

std::string join_values(const std::vector<Json>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += render_value(values[i]);
    }
    return out;
}

bool is_digits(std::string_view text) {
    return !text.empty() &&
           std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool valid_date_part(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    if (!is_digits(text.substr(0, 4)) || !is_digits(text.substr(5, 2)) ||
        !is_digits(text.substr(8, 2))) {
        return false;
    }
    int month = (text[5] - '0') * 10 + (text[6] - '0');
    int day = (text[8] - '0') * 10 + (text[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool valid_time_part(std::string_view text) {
    if (text.size() < 8 || text[2] != ':' || text[5] != ':') return false;
    if (!is_digits(text.substr(0, 2)) || !is_digits(text.substr(3, 2)) ||
        !is_digits(text.substr(6, 2))) {
        return false;
    }
    int hour = (text[0] - '0') * 10 + (text[1] - '0');
    int minute = (text[3] - '0') * 10 + (text[4] - '0');
    int second = (text[6] - '0') * 10 + (text[7] - '0');
    if (hour > 23 || minute > 59 || second > 60) return false;
    std::string_view rest = text.substr(8);
    if (rest.starts_with('.')) {
        std::size_t i = 1;
        while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
        if (i == 1) return false;
        rest = rest.substr(i);
    }
    if (rest.empty() || rest == "Z") return true;
    if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && rest[3] == ':') {
        return is_digits(rest.substr(1, 2)) && is_digits(rest.substr(4, 2));
    }
    return false;
}

bool conforms_to_format(const std::string& value, const std::string& format) {
    if (format == "iso8601-date") return valid_date_part(value);
    if (format == "iso8601-datetime") {
        auto t = value.find('T');
        if (t == std::string::npos) return false;
        return valid_date_part(std::string_view(value).substr(0, t)) &&
               valid_time_part(std::string_view(value).substr(t + 1));
    }
    // Unknown tags are documentation-only; no check applies.
    return true;
}

// Constraint failures use the declared failure mode when the parameter
// names one, otherwise a synthesized gateway-style message.
std::string constraint_message(const ToolSpec& spec, const ParameterSpec& param,
                               const std::string& detail) {
    if (param.constraints.error_label) {
        if (const auto* mode = spec.find_failure_mode(*param.constraints.error_label)) {
            return mode->message;
        }
    }
    return "Invalid parameter: " + detail;
}

std::optional<std::string> check_constraints(const ToolSpec& spec, const ParameterSpec& param,
                                             const Json& value) {
    const ConstraintSet& c = param.constraints;
    if (!c.enum_values.empty()) {
        bool member = std::any_of(c.enum_values.begin(), c.enum_values.end(),
                                  [&](const Json& ev) { return ev == value; });
        if (!member) return messages::enum_violation(spec, param);
    }
    if (value.is_number()) {
        double v = value.get<double>();
        if (c.min && v < *c.min) return messages::min_violation(spec, param);
        if (c.max && v > *c.max) return messages::max_violation(spec, param);
    }
    if (value.is_array()) {
        std::size_t n = value.size();
        if (c.min_items && n < *c.min_items) return messages::min_items_violation(spec, param);
        if (c.max_items && n > *c.max_items) return messages::max_items_violation(spec, param);
    }
    if (c.format && value.is_string() && !conforms_to_format(value.get<std::string>(), *c.format)) {
        return messages::format_violation(spec, param);
    }
    return std::nullopt;
}

}  // namespace

namespace messages {

std::string unknown_tool(const std::string& called_name) {
    return "Unknown tool: " + called_name + ".";
}

std::string unknown_parameter(const std::string& name) {
    return "Unknown parameter: " + name + ".";
}

std::string missing_required(const std::string& name) {
    return "Missing required parameter: " + name + ".";
}

std::string kind_mismatch(const ParameterSpec& param) {
    return "Invalid parameter: " + param.name + " must be of type " +
           toolspec::kind_to_string(param.kind) + ".";
}

std::string enum_violation(const ToolSpec& spec, const ParameterSpec& param) {
    return constraint_message(spec, param,
                              param.name + " must be one of [" +
                                  join_values(param.constraints.enum_values) + "].");
}

std::string min_violation(const ToolSpec& spec, const ParameterSpec& param) {
    return constraint_message(spec, param,
                              param.name + " must be at least " +
                                  render_number(param.constraints.min.value_or(0)) + ".");
}

std::string max_violation(const ToolSpec& spec, const ParameterSpec& param) {
    return constraint_message(spec, param,
                              param.name + " must be at most " +
                                  render_number(param.constraints.max.value_or(0)) + ".");
}

std::string min_items_violation(const ToolSpec& spec, const ParameterSpec& param) {
    std::size_t n = param.constraints.min_items.value_or(0);
    return constraint_message(spec, param,
                              param.name + " array must contain at least " + std::to_string(n) +
                                  (n == 1 ? " item." : " items."));
}

std::string max_items_violation(const ToolSpec& spec, const ParameterSpec& param) {
    std::size_t n = param.constraints.max_items.value_or(0);
    return constraint_message(spec, param,
                              param.name + " array must contain at most " + std::to_string(n) +
                                  (n == 1 ? " item." : " items."));
}

std::string format_violation(const ToolSpec& spec, const ParameterSpec& param) {
    return constraint_message(spec, param,
                              param.name + " must be a valid " +
                                  param.constraints.format.value_or("") + " value.");
}

std::string rule_violation(const ToolSpec& spec, const CrossFieldRule& rule) {
    if (const auto* mode = spec.find_failure_mode(rule.message)) {
        return mode->message;
    }
    auto param = [&](std::size_t i) {
        return i < rule.params.size() ? rule.params[i] : std::string("?");
    };
    switch (rule.kind) {
        case RuleKind::SameLength:
            return "Invalid parameter: " + param(0) + " and " + param(1) +
                   " must have the same length.";
        case RuleKind::OrderedBefore:
            return "Invalid parameter: " + param(0) + " must not be after " + param(1) + ".";
        case RuleKind::RequiresTogether:
            return "Invalid parameter: " + param(0) + " and " + param(1) +
                   " must be provided together.";
        case RuleKind::AtLeastOne: {
            std::string names;
            for (std::size_t i = 0; i < rule.params.size(); ++i) {
                if (i) names += ", ";
                names += rule.params[i];
            }
            return "Invalid parameter: at least one of " + names + " must be provided.";
        }
    }
    return "Invalid parameter: cross-field constraint violated.";
}

}  // namespace messages

namespace {

std::string rule_message(const ToolSpec& spec, const CrossFieldRule& rule) {
    return messages::rule_violation(spec, rule);
}

bool values_ordered(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return a.get<double>() <= b.get<double>();
    if (a.is_string() && b.is_string()) return a.get<std::string>() <= b.get<std::string>();
    return true;  // incomparable values are not this rule's concern
}

std::optional<std::string> check_rule(const ToolSpec& spec, const CrossFieldRule& rule,
                                      const std::map<std::string, Json>& args) {
    auto value_of = [&](const std::string& name) -> const Json* {
        auto it = args.find(name);
        return it == args.end() ? nullptr : &it->second;
    };
    switch (rule.kind) {
        case RuleKind::SameLength: {
            if (rule.params.size() < 2) return std::nullopt;
            const Json* a = value_of(rule.params[0]);
            const Json* b = value_of(rule.params[1]);
            if (a && b && a->is_array() && b->is_array() && a->size() != b->size()) {
                return rule_message(spec, rule);
            }
            return std::nullopt;
        }
        case RuleKind::OrderedBefore: {
            if (rule.params.size() < 2) return std::nullopt;
            const Json* a = value_of(rule.params[0]);
            const Json* b = value_of(rule.params[1]);
            if (a && b && !values_ordered(*a, *b)) return rule_message(spec, rule);
            return std::nullopt;
        }
        case RuleKind::RequiresTogether: {
            if (rule.params.size() < 2) return std::nullopt;
            bool a = value_of(rule.params[0]) != nullptr;
            bool b = value_of(rule.params[1]) != nullptr;
            if (a != b) return rule_message(spec, rule);
            return std::nullopt;
        }
        case RuleKind::AtLeastOne: {
            for (const auto& name : rule.params) {
                if (value_of(name)) return std::nullopt;
            }
            return rule_message(spec, rule);
        }
    }
    return std::nullopt;
}

}  // namespace

ValidationOutcome validate_call(const ToolSpec& spec, const ToolCall& call) {
    ValidationOutcome outcome;
    auto fail = [&](int code, std::string message) {
        outcome.passed = false;
        outcome.failure = ToolResponse::fail(code, std::move(message));
        return outcome;
    };

    if (toolspec::normalize_name(call.tool_name) != toolspec::normalize_name(spec.name)) {
        return fail(404, messages::unknown_tool(call.tool_name));
    }
    for (const auto& [name, value] : call.arguments) {
        if (!spec.find_parameter(name)) {
            return fail(400, messages::unknown_parameter(name));
        }
    }
    for (const auto& param : spec.parameters) {
        if (param.required && !call.arguments.contains(param.name)) {
            return fail(400, messages::missing_required(param.name));
        }
    }
    for (const auto& param : spec.parameters) {
        auto it = call.arguments.find(param.name);
        if (it != call.arguments.end() && !toolspec::value_conforms(it->second, param.kind)) {
            return fail(400, messages::kind_mismatch(param));
        }
    }

    std::map<std::string, Json> effective;
    std::set<std::string> defaulted;
    for (const auto& param : spec.parameters) {
        auto it = call.arguments.find(param.name);
        if (it != call.arguments.end()) {
            effective[param.name] = it->second;
        } else if (param.default_value) {
            effective[param.name] = *param.default_value;
            defaulted.insert(param.name);
        }
    }

    for (const auto& param : spec.parameters) {
        auto it = effective.find(param.name);
        if (it == effective.end()) continue;
        if (auto message = check_constraints(spec, param, it->second)) {
            return fail(400, std::move(*message));
        }
    }
    for (const auto& rule : spec.cross_field_rules) {
        if (auto message = check_rule(spec, rule, effective)) {
            return fail(400, std::move(*message));
        }
    }

    outcome.passed = true;
    outcome.effective_arguments = std::move(effective);
    outcome.defaulted = std::move(defaulted);
    return outcome;
}

GenerationMode classify_generation_mode(const ToolSpec&, const ToolCall& call,
                                        const Metadata& metadata) {
    for (const auto& [table_name, table] : metadata.tables) {
        for (const auto& [arg_name, value] : call.arguments) {
            if (argument_names_table_key(arg_name, table_name, table)) {
                return GenerationMode::InformationDeduction;
            }
        }
    }
    for (const auto& [table_name, table] : metadata.tables) {
        for (const auto& [arg_name, value] : call.arguments) {
            if (value.is_string() && table.find_record(value)) {
                return GenerationMode::InformationDeduction;
            }
            if (value.is_array()) {
                for (const auto& item : value) {
                    if (item.is_string() && table.find_record(item)) {
                        return GenerationMode::InformationDeduction;
                    }
                }
            }
        }
    }
    return GenerationMode::DataGeneration;
}

std::map<std::string, Json> derive_known_bindings(const ToolSpec& spec, const ToolCall& call,
                                                  const Metadata& metadata) {
    std::vector<const Json*> matched;
    auto add_match = [&](const Json* record) {
        if (record && std::find(matched.begin(), matched.end(), record) == matched.end()) {
            matched.push_back(record);
        }
    };
    for (const auto& [table_name, table] : metadata.tables) {
        for (const auto& [arg_name, value] : call.arguments) {
            if (!argument_names_table_key(arg_name, table_name, table)) continue;
            if (value.is_array()) {
                for (const auto& item : value) add_match(table.find_record(item));
            } else {
                add_match(table.find_record(value));
            }
        }
    }
    if (matched.empty()) {
        for (const auto& [table_name, table] : metadata.tables) {
            for (const auto& [arg_name, value] : call.arguments) {
                if (value.is_string()) add_match(table.find_record(value));
            }
        }
    }

    std::map<std::string, Json> bindings;
    for (const Json* record : matched) {
        for (const auto& field : spec.output_schema) {
            if (!bindings.contains(field.name) && record->contains(field.name)) {
                bindings[field.name] = record->at(field.name);
            }
        }
    }
    for (const auto& field : spec.output_schema) {
        if (bindings.contains(field.name)) continue;
        auto it = call.arguments.find(field.name);
        if (it != call.arguments.end()) {
            bindings[field.name] = it->second;
            continue;
        }
        constexpr std::string_view updated_prefix = "updated_";
        if (field.name.starts_with(updated_prefix)) {
            std::string stem = field.name.substr(updated_prefix.size());
            for (const auto& [arg_name, value] : call.arguments) {
                if (arg_name.starts_with(stem)) {
                    bindings[field.name] = value;
                    break;
                }
            }
        }
    }
    return bindings;
}

std::string unknown_entity_payload(const std::string& argument_name) {
    std::string stem = argument_name;
    if (stem.ends_with("_id")) stem = stem.substr(0, stem.size() - 3);
    std::replace(stem.begin(), stem.end(), '_', ' ');
    return "Error: Invalid " + stem + " ID: Ensure the " + stem +
           " ID is correct and exists in the database.";
}

std::optional<std::string> known_domain_miss(const ToolCall& call, const Metadata& metadata) {
    for (const auto& [table_name, table] : metadata.tables) {
        for (const auto& [arg_name, value] : call.arguments) {
            if (!argument_names_table_key(arg_name, table_name, table)) continue;
            if (value.is_string() && !table.find_record(value)) {
                return unknown_entity_payload(arg_name);
            }
            if (value.is_array()) {
                for (const auto& item : value) {
                    if (item.is_string() && !table.find_record(item)) {
                        return unknown_entity_payload(arg_name);
                    }
                }
            }
        }
    }
    return std::nullopt;
}

namespace {

Json filler_field_value(const ToolSpec& spec, const toolspec::OutputFieldSpec& field,
                        const ToolCall& call) {
    std::uint64_t h = rng::fnv1a64(spec.name + "|" + field.name + "|" + call.to_json().dump());
    if (field.kind.is_array) {
        Json element;
        switch (field.kind.base) {
            case BaseKind::String: element = "entry_" + rng::hex64(h).substr(0, 6); break;
            case BaseKind::Integer: element = static_cast<std::int64_t>(h % 90 + 10); break;
            case BaseKind::Number: element = static_cast<double>(h % 9000) / 100.0 + 1.0; break;
            case BaseKind::Boolean: element = true; break;
        }
        return Json::array({element});
    }
    switch (field.kind.base) {
        case BaseKind::String: {
            std::string lower;
            for (char c : field.name) {
                lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
            if (lower.find("status") != std::string::npos) return "Success";
            return field.name + "_" + rng::hex64(h).substr(0, 6);
        }
        case BaseKind::Integer:
            return static_cast<std::int64_t>(h % 90 + 10);
        case BaseKind::Number:
            return static_cast<double>(h % 900000) / 100.0 + 1.0;
        case BaseKind::Boolean:
            return true;
    }
    return Json();
}

}  // namespace

ToolResponse reference_pass_response(const ToolSpec& spec, const ToolCall& call,
                                     const Metadata& metadata) {
    if (classify_generation_mode(spec, call, metadata) == GenerationMode::InformationDeduction) {
        if (auto miss = known_domain_miss(call, metadata)) {
            return ToolResponse::pass(Json{{"error", *miss}});
        }
    }
    if (auto executor = reference_executor_for(toolspec::normalize_name(spec.name))) {
        return ToolResponse::pass((*executor)(call.arguments));
    }
    Json data = Json::object();
    auto bindings = derive_known_bindings(spec, call, metadata);
    for (const auto& field : spec.output_schema) {
        auto it = bindings.find(field.name);
        data[field.name] = it != bindings.end() ? it->second : filler_field_value(spec, field, call);
    }
    return ToolResponse::pass(std::move(data));
}

namespace {

bool acceptable_stage2(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error&) {
        return false;
    }
    return doc.is_object() && doc.value("status", "") == "PASS" &&
           doc.contains("return_data") && doc.at("return_data").is_object();
}

}  // namespace

ToolResponse generate_response(const ToolSpec& spec, const ToolCall& call, const Metadata& metadata,
                               gateway::Gateway& gateway_ref, const SimOptions& options) {
    GenerationMode mode = classify_generation_mode(spec, call, metadata);
    Json context{{"stage", "simulate"},
                 {"mode", generation_mode_name(mode)},
                 {"spec", toolspec::spec_to_json(spec)},
                 {"call", call.to_json()},
                 {"metadata", metadata.to_json()}};

    gateway::CompletionRequest request;
    request.tag = "simulation";
    request.temperature = 0.0;
    if (options.prompts) {
        request.prompt = options.prompts->render(
            "simulate", {{"context", gateway::context_header(context)},
                         {"tool_name", spec.name},
                         {"mode", generation_mode_name(mode)}});
    } else {
        request.prompt = gateway::context_header(context) +
                         "\nEmulate the tool call above. Respond with JSON "
                         "{\"status\": \"PASS\", \"return_data\": {...}} and nothing else.";
    }

    gateway::RetryResult result;
    try {
        result = gateway_ref.complete_with_retry(request, options.max_attempts, acceptable_stage2);
    } catch (const gateway::GatewayError& e) {
        throw SimulatorFault(std::string("gateway failure during response generation: ") + e.what());
    }
    if (result.exhausted) {
        throw SimulatorFault("unparseable simulation completion after " +
                                 std::to_string(result.attempts) + " attempts",
                             result.text);
    }
    if (options.notes && result.attempts > 1) {
        options.notes->push_back("simulation retried " + std::to_string(result.attempts - 1) +
                                 " time(s) for " + spec.name);
    }

    Json doc = Json::parse(result.text);
    Json data = Json::object();
    for (auto it = doc.at("return_data").begin(); it != doc.at("return_data").end(); ++it) {
        if (spec.find_output_field(it.key()) || it.key() == "error") {
            data[it.key()] = it.value();
        } else if (options.notes) {
            options.notes->push_back("stripped undeclared return field '" + it.key() + "' from " +
                                     spec.name);
        }
    }
    return ToolResponse::pass(std::move(data));
}

ToolResponse simulate(const ToolSpec& spec, const ToolCall& call, const Metadata& metadata,
                      gateway::Gateway& gateway_ref, const SimOptions& options) {
    ValidationOutcome validation = validate_call(spec, call);
    if (!validation.passed) {
        return validation.failure;
    }
    ToolCall effective = call;
    effective.arguments = validation.effective_arguments;
    return generate_response(spec, effective, metadata, gateway_ref, options);
}

}  // namespace synthtools::sim
