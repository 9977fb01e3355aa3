#include "synthtools/mock_provider.hpp"

#include "synthtools/metadata.hpp"
#include "synthtools/reference_executors.hpp"
#include "synthtools/rng.hpp"
#include "synthtools/simulator.hpp"
#include "synthtools/stresstest.hpp"
#include "synthtools/toolspec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace synthtools::gateway {

namespace {

using sim::Metadata;
using sim::ToolCall;
using toolspec::ToolSpec;

const char* kSubdomainThemes[] = {"Operations",        "Compliance and Audit", "Planning",
                                  "Customer Accounts", "Analytics",            "Field Services",
                                  "Asset Management",  "Scheduling"};

const char* kTaskVerbs[] = {"Track and reconcile", "Validate and register", "Schedule and assign",
                            "Audit and report on", "Forecast and plan"};

const char* kToolNouns[] = {"Validator", "Tracker",  "Calculator", "Updater",
                            "Fetcher",   "Reporter", "Scheduler",  "Analyzer"};

const char* kEntityStems[] = {"order", "ticket", "record", "account", "shipment", "case"};

std::string title_case(std::string text) {
    bool start = true;
    for (char& c : text) {
        if (c == '_' || c == ' ') {
            c = ' ';
            start = true;
        } else if (start) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            start = false;
        }
    }
    return text;
}

std::string subdomains_stage(const Json& context, std::uint64_t seed) {
    std::string field = context.value("field", "");
    int count = context.value("count", 1);
    rng::SplitMix64 rng(rng::derive_seed(seed, "subdomains:" + field));
    std::size_t offset = rng.bounded(std::size(kSubdomainThemes));
    Json out = Json::array();
    for (int i = 0; i < count; ++i) {
        std::string theme = kSubdomainThemes[(offset + i) % std::size(kSubdomainThemes)];
        out.push_back(field + " " + theme);
    }
    return out.dump();
}

std::string tasks_stage(const Json& context, std::uint64_t seed) {
    std::string subdomain = context.value("subdomain", "");
    int count = context.value("count", 1);
    rng::SplitMix64 rng(rng::derive_seed(seed, "tasks:" + subdomain));
    std::size_t offset = rng.bounded(std::size(kTaskVerbs));
    Json out = Json::array();
    for (int i = 0; i < count; ++i) {
        std::string verb = kTaskVerbs[(offset + i) % std::size(kTaskVerbs)];
        out.push_back(verb + " " + subdomain + " items (workstream " + std::to_string(i + 1) + ")");
    }
    return out.dump();
}

Json fabricate_tool(const std::string& task, std::size_t index, rng::SplitMix64& rng) {
    std::string stem = kEntityStems[rng.bounded(std::size(kEntityStems))];
    std::string noun = kToolNouns[(index + rng.bounded(2)) % std::size(kToolNouns)];
    std::string name = title_case(stem) + " " + noun + " " + std::to_string(index + 1);

    Json parameters = Json::array();
    parameters.push_back(Json{{"name", stem + "_id"},
                              {"kind", "string"},
                              {"required", true}});
    parameters.push_back(Json{{"name", "limit"},
                              {"kind", "integer"},
                              {"required", false},
                              {"default", 10},
                              {"constraints", Json{{"min", 1},
                                                   {"max", 100},
                                                   {"error_label", "invalid_limit"}}}});
    parameters.push_back(Json{
        {"name", "mode"},
        {"kind", "string"},
        {"required", false},
        {"default", "basic"},
        {"constraints", Json{{"enum", Json::array({"basic", "detailed"})},
                             {"error_label", "invalid_mode"}}}});

    Json rules = Json::array();
    bool paired_arrays = rng.bounded(3) == 0;
    if (paired_arrays) {
        parameters.push_back(Json{{"name", "field_names"},
                                  {"kind", "array-of-string"},
                                  {"required", true},
                                  {"constraints", Json{{"min_items", 1}}}});
        parameters.push_back(Json{{"name", "field_values"},
                                  {"kind", "array-of-string"},
                                  {"required", true},
                                  {"constraints", Json{{"min_items", 1}}}});
        rules.push_back(Json{{"kind", "same_length"},
                             {"params", Json::array({"field_names", "field_values"})},
                             {"message", "mismatched_fields"}});
    }

    Json failure_modes = Json::array(
        {Json{{"label", "invalid_limit"},
              {"message", "Invalid limit: limit must be between 1 and 100."},
              {"trigger", "limit outside its documented range"}},
         Json{{"label", "invalid_mode"},
              {"message", "Invalid mode: mode must be either basic or detailed."},
              {"trigger", "mode not in the documented set"}},
         Json{{"label", "not_found"},
              {"message", "Record not found: the referenced " + stem + " does not exist."},
              {"trigger", "unknown " + stem + " id"}}});
    if (paired_arrays) {
        failure_modes.push_back(
            Json{{"label", "mismatched_fields"},
                 {"message", "Mismatched fields and values: Ensure field_names and field_values "
                             "arrays have the same length."},
                 {"trigger", "field_names and field_values differ in length"}});
    }

    Json output_schema = Json::array(
        {Json{{"name", stem + "_status"},
              {"kind", "string"},
              {"description", "Current status of the " + stem}},
         Json{{"name", "details"},
              {"kind", "string"},
              {"description", "Free-text summary of the result"}},
         Json{{"name", "amount"},
              {"kind", "number"},
              {"description", "Amount in USD affected by the operation"}}});

    return Json{{"name", name},
                {"description", "Handles " + task + " for a single " + stem + "."},
                {"parameters", parameters},
                {"usage", "Provide " + stem + "_id; optionally tune limit and mode."},
                {"failure_modes", failure_modes},
                {"output_schema", output_schema},
                {"consumes", Json::array({stem + " records"})},
                {"produces", Json::array({stem + " report"})},
                {"cross_field_rules", rules}};
}

std::string tools_stage(const Json& context, std::uint64_t seed) {
    std::string task = context.value("task", "");
    int count = context.value("count", 1);
    rng::SplitMix64 rng(rng::derive_seed(seed, "tools:" + task));
    Json out = Json::array();
    for (int i = 0; i < count; ++i) {
        out.push_back(fabricate_tool(task, static_cast<std::size_t>(i), rng));
    }
    return out.dump();
}

std::string simulate_stage(const Json& context) {
    auto spec_outcome = toolspec::parse_tool_spec(context.at("spec"));
    if (!spec_outcome.ok()) {
        throw GatewayError("mock simulate stage: invalid spec in context");
    }
    ToolCall call = ToolCall::from_json(context.at("call"));
    Metadata metadata;
    if (context.contains("metadata")) {
        auto parsed = sim::parse_metadata(context.at("metadata"));
        if (parsed.ok()) metadata = std::move(*parsed.metadata);
    }
    auto response = sim::reference_pass_response(*spec_outcome.spec, call, metadata);
    return Json{{"status", "PASS"}, {"return_data", response.return_data}}.dump();
}

bool json_values_close(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) {
        double x = a.get<double>();
        double y = b.get<double>();
        return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!json_values_close(a[i], b[i])) return false;
        }
        return true;
    }
    return a == b;
}

std::string judge_stage(const Json& context) {
    auto spec_outcome = toolspec::parse_tool_spec(context.at("spec"));
    if (!spec_outcome.ok()) {
        throw GatewayError("mock judge stage: invalid spec in context");
    }
    const ToolSpec& spec = *spec_outcome.spec;
    ToolCall call = ToolCall::from_json(context.at("call"));
    sim::ToolResponse response = sim::ToolResponse::from_json(context.at("response"));
    Metadata metadata;
    if (context.contains("metadata")) {
        auto parsed = sim::parse_metadata(context.at("metadata"));
        if (parsed.ok()) metadata = std::move(*parsed.metadata);
    }

    auto verdict = [](bool correct, double confidence, const std::string& rationale) {
        return Json{{"verdict", correct ? "correct" : "incorrect"},
                    {"confidence", confidence},
                    {"rationale", rationale}}
            .dump();
    };

    auto validation = sim::validate_call(spec, call);
    if (!validation.passed) {
        const auto& expected = validation.failure_envelope();
        if (response == expected) {
            return verdict(true, 0.97, "The call violates the declared schema and the simulator "
                                       "returned the matching gateway failure.");
        }
        return verdict(false, 0.95,
                       "The call should have failed validation with: " + expected.error_message +
                           " The simulator answered differently.");
    }

    if (!response.passed() || response.status_code != 200) {
        return verdict(false, 0.95,
                       "The call satisfies the specification, so a PASS 200 envelope was "
                       "expected; the simulator returned status code " +
                           std::to_string(response.status_code) + ".");
    }
    ToolCall effective = call;
    effective.arguments = validation.effective_arguments;
    auto bindings = sim::derive_known_bindings(spec, effective, metadata);
    for (const auto& [field, expected] : bindings) {
        if (!response.return_data.contains(field) ||
            !json_values_close(expected, response.return_data.at(field))) {
            return verdict(false, 0.9,
                           "Return field '" + field +
                               "' is inconsistent with the task metadata for this call.");
        }
    }
    for (auto it = response.return_data.begin(); it != response.return_data.end(); ++it) {
        if (it.key() != "error" && !spec.find_output_field(it.key())) {
            return verdict(false, 0.85,
                           "Return field '" + it.key() + "' is not part of the output schema.");
        }
    }
    return verdict(true, 0.95, "Valid call and a schema-conformant, metadata-consistent response.");
}

std::string task_bundle_stage(const Json& context, std::uint64_t seed) {
    std::vector<ToolSpec> tools;
    for (const auto& doc : context.at("tools")) {
        auto outcome = toolspec::parse_tool_spec(doc);
        if (outcome.ok()) tools.push_back(std::move(*outcome.spec));
    }
    if (tools.empty()) throw GatewayError("mock task stage: no usable tools in context");

    std::string difficulty = context.value("difficulty", "simple");
    std::string validity = context.value("validity", "valid");
    std::uint64_t bundle_seed = context.value("seed", std::uint64_t{0});
    rng::SplitMix64 rng(rng::derive_seed(seed ^ bundle_seed, "task_bundle"));

    std::size_t unique_cap = difficulty == "complex" ? 10 : difficulty == "medium" ? 6 : 3;
    std::size_t unique_count = std::min(unique_cap, tools.size());
    int repeats = difficulty == "complex" ? 2 : difficulty == "medium" ? 1 : 0;

    Metadata empty;
    Json golden = Json::array();
    std::vector<std::string> required;
    std::map<std::string, std::vector<std::string>> stems_to_ids;
    std::map<std::string, int> stem_counters;

    auto make_call = [&](const ToolSpec& spec) {
        ToolCall call = stress::build_valid_call(spec, empty, false, rng);
        for (auto& [arg_name, value] : call.arguments) {
            if (arg_name.ends_with("_id") && value.is_string()) {
                std::string stem = arg_name.substr(0, arg_name.size() - 3);
                std::string upper;
                for (char c : stem) {
                    upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
                }
                auto& ids = stems_to_ids[stem];
                if (ids.empty() || rng.bounded(3) == 0) {
                    int n = ++stem_counters[stem];
                    char buf[16];
                    std::snprintf(buf, sizeof(buf), "-%03d", n);
                    ids.push_back(upper + buf);
                }
                value = ids[rng.bounded(ids.size())];
            }
        }
        return call;
    };

    for (std::size_t i = 0; i < unique_count; ++i) {
        required.push_back(tools[i].name);
        golden.push_back(make_call(tools[i]).to_json());
    }
    for (int r = 0; r < repeats && unique_count > 0; ++r) {
        golden.push_back(make_call(tools[r % unique_count]).to_json());
    }

    Json tables = Json::object();
    for (const auto& [stem, ids] : stems_to_ids) {
        Json records = Json::array();
        int n = 0;
        for (const auto& id : ids) {
            records.push_back(Json{{stem + "_id", id},
                                   {"name", title_case(stem) + " " + std::to_string(++n)},
                                   {"status", "active"}});
        }
        tables[title_case(stem) + "s"] = records;
    }

    if (validity == "invalid") {
        required.push_back("Unprovisioned " + std::string(kToolNouns[rng.bounded(4)]));
    }

    std::string description = "Work through the " + difficulty + " workflow: ";
    for (std::size_t i = 0; i < required.size(); ++i) {
        if (i) description += ", then ";
        description += required[i];
    }
    description += ". Touch the seeded entities only.";

    Json bundle{{"description", description},
                {"difficulty", difficulty},
                {"validity", validity},
                {"tools_required", required},
                {"golden", golden},
                {"metadata", Json{{"tables", tables}, {"scalars", Json::object()}}},
                {"turn_limit", 30}};
    return bundle.dump();
}

}  // namespace

std::string DeterministicMockBackend::complete(const CompletionRequest& request) {
    auto context = parse_context_header(request.prompt);
    if (!context) {
        throw GatewayError("mock provider needs a CONTEXT header; prompt tag '" + request.tag + "'");
    }
    std::string stage = context->value("stage", "");
    if (stage == "subdomains") return subdomains_stage(*context, seed_);
    if (stage == "tasks") return tasks_stage(*context, seed_);
    if (stage == "tools") return tools_stage(*context, seed_);
    if (stage == "simulate") return simulate_stage(*context);
    if (stage == "judge") return judge_stage(*context);
    if (stage == "task_bundle") return task_bundle_stage(*context, seed_);
    throw GatewayError("mock provider cannot answer stage '" + stage + "'");
}

}  // namespace synthtools::gateway
