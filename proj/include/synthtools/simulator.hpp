#pragma once

#include "synthtools/gateway.hpp"
#include "synthtools/metadata.hpp"
#include "synthtools/toolspec.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace synthtools::sim {

struct ToolCall {
    std::string tool_name;
    std::map<std::string, Json> arguments;
    std::optional<std::string> session;

    Json to_json() const;
    static ToolCall from_json(const Json& doc);

    bool operator==(const ToolCall&) const = default;
};

struct ToolResponse {
    enum class Status { Pass, Fail };

    Status status = Status::Pass;
    int status_code = 200;
    std::string error_message;  // FAIL only
    Json return_data = Json::object();  // PASS only

    bool passed() const { return status == Status::Pass; }

    Json to_json() const;
    static ToolResponse from_json(const Json& doc);

    static ToolResponse pass(Json data);
    static ToolResponse fail(int code, std::string message);

    bool operator==(const ToolResponse&) const = default;
};

// Envelope invariants: PASS <=> 200 with return_data only,
// FAIL <=> 400/404 with error_message only.
bool envelope_well_formed(const ToolResponse& response);

enum class GenerationMode { DataGeneration, InformationDeduction };

std::string generation_mode_name(GenerationMode mode);

// Raised for internal simulator faults (gateway failures, unparseable
// completions after retries). Distinct from FAIL envelopes, which are the
// ordinary return contract.
class SimulatorFault : public std::runtime_error {
  public:
    explicit SimulatorFault(std::string what, std::string raw = "")
        : std::runtime_error(std::move(what)), raw_completion(std::move(raw)) {}

    std::string raw_completion;
};

struct ValidationOutcome {
    bool passed = false;
    ToolResponse failure;                       // meaningful iff !passed
    std::map<std::string, Json> effective_arguments;  // supplied plus defaults
    std::set<std::string> defaulted;            // names filled from defaults

    const ToolResponse& failure_envelope() const { return failure; }
};

// Stage 1: pure schema/constraint gateway. Checks run in a fixed order —
// tool name, unknown arguments, missing required, kind mismatches, then
// per-parameter constraints and cross-field rules in declaration order —
// and the first violation wins. No model calls happen here.
ValidationOutcome validate_call(const toolspec::ToolSpec& spec, const ToolCall& call);

// Stage-2 routing: deduction when the call touches entities the metadata
// models (a keyed table match by argument name, or an argument value equal
// to some table key), generation otherwise.
GenerationMode classify_generation_mode(const toolspec::ToolSpec& spec, const ToolCall& call,
                                        const Metadata& metadata);

// Expected output bindings that are mechanically derivable for a call over
// known metadata: record fields named like output fields, argument echoes,
// and updated_* echoes. Used for automatic verification of known-input
// responses and by the deterministic offline provider.
std::map<std::string, Json> derive_known_bindings(const toolspec::ToolSpec& spec,
                                                  const ToolCall& call, const Metadata& metadata);

struct SimOptions {
    const gateway::PromptLibrary* prompts = nullptr;
    int max_attempts = 3;
    std::vector<std::string>* notes = nullptr;  // stripped keys and retries land here
};

// Stage 2: metadata-conditioned response generation through the gateway.
// Requires a validated call. Return-data keys outside the output schema
// are stripped (the reserved "error" key excepted) and noted.
ToolResponse generate_response(const toolspec::ToolSpec& spec, const ToolCall& call,
                               const Metadata& metadata, gateway::Gateway& gateway,
                               const SimOptions& options = {});

// The public entry point: stage 1, then stage 2 for surviving calls.
ToolResponse simulate(const toolspec::ToolSpec& spec, const ToolCall& call,
                      const Metadata& metadata, gateway::Gateway& gateway,
                      const SimOptions& options = {});

// Business-level miss payload for valid calls naming entities the metadata
// domain knows but does not contain, e.g. a fetch for an id absent from
// its table. Shared by the offline provider and fixtures.
std::string unknown_entity_payload(const std::string& argument_name);

// First id-like argument that names a modeled table but misses every
// record in it, reported as the miss payload text.
std::optional<std::string> known_domain_miss(const ToolCall& call, const Metadata& metadata);

// Mechanically assembled PASS envelope: reference executors where one
// exists, otherwise metadata bindings plus deterministic per-kind fillers
// for the remaining output fields. Backs fixtures, judge-case
// construction, and the offline provider.
ToolResponse reference_pass_response(const toolspec::ToolSpec& spec, const ToolCall& call,
                                     const Metadata& metadata);

// The gateway's message catalogue. Constraint and rule failures resolve to
// the declared failure mode when one is named, otherwise to a synthesized
// message in the same style. Exposed so test-call builders can predict
// envelopes without running the validator.
namespace messages {

std::string unknown_tool(const std::string& called_name);
std::string unknown_parameter(const std::string& name);
std::string missing_required(const std::string& name);
std::string kind_mismatch(const toolspec::ParameterSpec& param);
std::string enum_violation(const toolspec::ToolSpec& spec, const toolspec::ParameterSpec& param);
std::string min_violation(const toolspec::ToolSpec& spec, const toolspec::ParameterSpec& param);
std::string max_violation(const toolspec::ToolSpec& spec, const toolspec::ParameterSpec& param);
std::string min_items_violation(const toolspec::ToolSpec& spec,
                                const toolspec::ParameterSpec& param);
std::string max_items_violation(const toolspec::ToolSpec& spec,
                                const toolspec::ParameterSpec& param);
std::string format_violation(const toolspec::ToolSpec& spec, const toolspec::ParameterSpec& param);
std::string rule_violation(const toolspec::ToolSpec& spec, const toolspec::CrossFieldRule& rule);

}  // namespace messages

}  // namespace synthtools::sim
