#pragma once

#include "synthtools/rng.hpp"
#include "synthtools/simulator.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synthtools::stress {

// One synthesized test call. Modes: 1 schema failure, 2 constraint
// failure, 3 success on new input, 4 success on metadata-known input.
struct StressCall {
    sim::ToolCall call;
    int mode = 1;
    std::optional<sim::ToolResponse> expected_failure;   // modes 1-2
    std::map<std::string, Json> expected_bindings;       // mode 4
    std::string note;  // which fault was planted / which record was sampled

    Json to_json() const;
    static StressCall from_json(const Json& doc);
};

enum class Verdict { Correct, Incorrect, Unjudged };

std::string verdict_name(Verdict verdict);

struct SuiteResult {
    struct PerCall {
        StressCall stress;
        sim::ToolResponse response;
        Verdict verdict = Verdict::Unjudged;
    };

    std::string tool_name;
    std::vector<PerCall> per_call;

    std::map<int, std::map<Verdict, int>> counts_by_mode() const;
    int count(Verdict verdict) const;

    Json to_json() const;
    static SuiteResult from_json(const Json& doc);
};

// Synthesizes a call that passes stage-1 validation, using only required
// parameters. With known_input, id-like arguments sample key values from
// the metadata tables they reference; otherwise synthetic "ZZZ-" ids are
// used, which are guaranteed absent from metadata.
sim::ToolCall build_valid_call(const toolspec::ToolSpec& spec, const sim::Metadata& metadata,
                               bool known_input, rng::SplitMix64& rng);

// 8-10 calls per tool when every mode is available: two per mode plus up
// to two extra known-input calls when the metadata is rich. Unavailable
// modes (no constraints, empty metadata) are skipped with a note in `log`.
// Deterministic in (spec, metadata, seed).
std::vector<StressCall> build_stress_suite(const toolspec::ToolSpec& spec,
                                           const sim::Metadata& metadata, std::uint64_t seed,
                                           std::vector<std::string>* log = nullptr);

// Known-input verification: every expected binding must appear in the
// response with exact equality for strings/booleans, relative tolerance
// 1e-9 for numbers, and 2-decimal comparison for fields whose output
// description marks them as monetary. Throws if the call is not mode 4.
Verdict auto_verify_known(const toolspec::ToolSpec& spec, const StressCall& stress,
                          const sim::ToolResponse& response, const sim::Metadata& metadata);

// Runs the suite through the simulator. Modes 1-2 are judged against
// their expected envelopes, mode 4 by auto_verify_known, mode 3 left for
// the audit stage. Simulator faults are recorded as incorrect.
SuiteResult run_suite(const toolspec::ToolSpec& spec, const sim::Metadata& metadata,
                      gateway::Gateway& gateway, std::uint64_t seed,
                      const sim::SimOptions& options = {},
                      std::vector<std::string>* log = nullptr);

}  // namespace synthtools::stress
