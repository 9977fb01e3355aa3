#pragma once

#include "synthtools/jsonio.hpp"

#include <optional>
#include <string>
#include <vector>

namespace synthtools::toolspec {

// Value kinds cover scalars plus one level of homogeneous arrays.
// Nested objects and binary payloads are out of scope.
enum class BaseKind { String, Integer, Number, Boolean };

struct ValueKind {
    BaseKind base = BaseKind::String;
    bool is_array = false;

    bool operator==(const ValueKind&) const = default;
};

std::string kind_to_string(ValueKind kind);
std::optional<ValueKind> kind_from_string(const std::string& text);

// True when `value` conforms to `kind`. Integral doubles are accepted for
// integer kinds; numbers accept both integers and doubles.
bool value_conforms(const Json& value, ValueKind kind);

struct ConstraintSet {
    std::vector<Json> enum_values;
    std::optional<double> min;
    std::optional<double> max;
    std::optional<std::size_t> min_items;
    std::optional<std::size_t> max_items;
    std::optional<std::string> format;       // e.g. "iso8601-datetime"
    std::optional<std::string> error_label;  // failure mode to emit on violation

    bool empty() const {
        return enum_values.empty() && !min && !max && !min_items && !max_items && !format;
    }
    bool operator==(const ConstraintSet&) const = default;
};

struct ParameterSpec {
    std::string name;
    ValueKind kind;
    bool required = true;
    std::optional<Json> default_value;
    ConstraintSet constraints;

    bool operator==(const ParameterSpec&) const = default;
};

struct ErrorSpec {
    std::string label;
    std::string message;
    std::string trigger;

    bool operator==(const ErrorSpec&) const = default;
};

struct OutputFieldSpec {
    std::string name;
    ValueKind kind;
    std::string description;

    bool operator==(const OutputFieldSpec&) const = default;
};

struct DomainPath {
    std::string field;
    std::string subdomain;
    std::string task;

    bool operator==(const DomainPath&) const = default;
};

enum class RuleKind { SameLength, OrderedBefore, RequiresTogether, AtLeastOne };

std::string rule_kind_to_string(RuleKind kind);
std::optional<RuleKind> rule_kind_from_string(const std::string& text);

struct CrossFieldRule {
    RuleKind kind = RuleKind::SameLength;
    std::vector<std::string> params;
    std::string message;  // label of the failure mode to emit

    bool operator==(const CrossFieldRule&) const = default;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ParameterSpec> parameters;
    std::string usage;
    std::vector<ErrorSpec> failure_modes;
    std::vector<OutputFieldSpec> output_schema;
    DomainPath provenance;
    std::vector<std::string> consumes;
    std::vector<std::string> produces;
    std::vector<CrossFieldRule> cross_field_rules;

    bool operator==(const ToolSpec&) const = default;

    const ParameterSpec* find_parameter(const std::string& name) const;
    const ErrorSpec* find_failure_mode(const std::string& label) const;
    const OutputFieldSpec* find_output_field(const std::string& name) const;
};

struct Defect {
    std::string path;     // field path, e.g. "parameters[2].constraints"
    std::string message;

    bool operator==(const Defect&) const = default;
};

struct ParseOutcome {
    std::optional<ToolSpec> spec;  // set iff defects is empty
    std::vector<Defect> defects;

    bool ok() const { return spec.has_value(); }
};

// Lowercases, maps runs of non-alphanumerics to single underscores, and
// trims edge underscores. Idempotent. An empty result means the input had
// no alphanumeric content ("unnameable").
std::string normalize_name(std::string_view text);

// Parses one tool document. On success the returned spec satisfies every
// structural invariant; otherwise `defects` lists all violations found
// (one entry per violation), with syntax errors reported first.
ParseOutcome parse_tool_spec(const std::string& document);
ParseOutcome parse_tool_spec(const Json& document);

// Structural invariant check over an already-built spec; used by both the
// parser and generation's validation gate.
std::vector<Defect> validate_spec(const ToolSpec& spec);

Json spec_to_json(const ToolSpec& spec);

// Deterministic byte serialization: sorted object keys, arrays in
// declaration order, no insignificant whitespace. Round-trips through
// parse_tool_spec.
std::string canonical_serialize(const ToolSpec& spec);

// The body fields used for duplicate detection: description, parameters,
// usage and output schema (name excluded).
std::string canonical_body(const ToolSpec& spec);

// Embedding text: the name plus the body fields, canonically serialized.
std::string embedding_text(const ToolSpec& spec);

}  // namespace synthtools::toolspec
