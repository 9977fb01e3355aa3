#include "synthtools/toolspec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace synthtools::toolspec {

namespace {

const char* base_kind_name(BaseKind base) {
    switch (base) {
        case BaseKind::String: return "string";
        case BaseKind::Integer: return "integer";
        case BaseKind::Number: return "number";
        case BaseKind::Boolean: return "boolean";
    }
    return "string";
}

std::optional<BaseKind> base_kind_from(const std::string& text) {
    if (text == "string") return BaseKind::String;
    if (text == "integer") return BaseKind::Integer;
    if (text == "number") return BaseKind::Number;
    if (text == "boolean") return BaseKind::Boolean;
    return std::nullopt;
}

bool scalar_conforms(const Json& value, BaseKind base) {
    switch (base) {
        case BaseKind::String:
            return value.is_string();
        case BaseKind::Boolean:
            return value.is_boolean();
        case BaseKind::Integer:
            if (value.is_number_integer()) return true;
            if (value.is_number_float()) {
                double d = value.get<double>();
                return std::floor(d) == d;
            }
            return false;
        case BaseKind::Number:
            return value.is_number();
    }
    return false;
}

}  // namespace

std::string kind_to_string(ValueKind kind) {
    std::string base = base_kind_name(kind.base);
    return kind.is_array ? "array-of-" + base : base;
}

std::optional<ValueKind> kind_from_string(const std::string& text) {
    constexpr std::string_view prefix = "array-of-";
    if (text.starts_with(prefix)) {
        auto base = base_kind_from(text.substr(prefix.size()));
        if (!base) return std::nullopt;
        return ValueKind{*base, true};
    }
    auto base = base_kind_from(text);
    if (!base) return std::nullopt;
    return ValueKind{*base, false};
}

bool value_conforms(const Json& value, ValueKind kind) {
    if (kind.is_array) {
        if (!value.is_array()) return false;
        return std::all_of(value.begin(), value.end(), [&](const Json& item) {
            return scalar_conforms(item, kind.base);
        });
    }
    return scalar_conforms(value, kind.base);
}

std::string rule_kind_to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::SameLength: return "same_length";
        case RuleKind::OrderedBefore: return "ordered_before";
        case RuleKind::RequiresTogether: return "requires_together";
        case RuleKind::AtLeastOne: return "at_least_one";
    }
    return "same_length";
}

std::optional<RuleKind> rule_kind_from_string(const std::string& text) {
    if (text == "same_length") return RuleKind::SameLength;
    if (text == "ordered_before") return RuleKind::OrderedBefore;
    if (text == "requires_together") return RuleKind::RequiresTogether;
    if (text == "at_least_one") return RuleKind::AtLeastOne;
    return std::nullopt;
}

const ParameterSpec* ToolSpec::find_parameter(const std::string& param_name) const {
    for (const auto& p : parameters) {
        if (p.name == param_name) return &p;
    }
    return nullptr;
}

const ErrorSpec* ToolSpec::find_failure_mode(const std::string& label) const {
    for (const auto& e : failure_modes) {
        if (e.label == label) return &e;
    }
    return nullptr;
}

const OutputFieldSpec* ToolSpec::find_output_field(const std::string& field_name) const {
    for (const auto& f : output_schema) {
        if (f.name == field_name) return &f;
    }
    return nullptr;
}

std::string normalize_name(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_sep = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_sep && !out.empty()) out.push_back('_');
            pending_sep = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_sep = true;
        }
    }
    return out;
}

namespace {

struct Reader {
    std::vector<Defect>& defects;

    void defect(const std::string& path, const std::string& message) {
        defects.push_back({path, message});
    }

    std::string get_string(const Json& obj, const std::string& key, const std::string& path,
                           bool required = true) {
        if (!obj.contains(key)) {
            if (required) defect(path, "missing field '" + key + "'");
            return {};
        }
        if (!obj.at(key).is_string()) {
            defect(path + "." + key, "expected a string");
            return {};
        }
        return obj.at(key).get<std::string>();
    }

    std::vector<std::string> get_string_list(const Json& obj, const std::string& key,
                                             const std::string& path) {
        std::vector<std::string> out;
        if (!obj.contains(key)) return out;
        if (!obj.at(key).is_array()) {
            defect(path + "." + key, "expected an array of strings");
            return out;
        }
        for (const auto& item : obj.at(key)) {
            if (!item.is_string()) {
                defect(path + "." + key, "expected an array of strings");
                return out;
            }
            out.push_back(item.get<std::string>());
        }
        return out;
    }
};

ConstraintSet parse_constraints(const Json& obj, const std::string& path, Reader& r) {
    ConstraintSet out;
    if (!obj.is_object()) {
        r.defect(path, "constraints must be an object");
        return out;
    }
    if (obj.contains("enum")) {
        if (!obj.at("enum").is_array()) {
            r.defect(path + ".enum", "expected an array");
        } else {
            for (const auto& v : obj.at("enum")) out.enum_values.push_back(v);
        }
    }
    auto read_number = [&](const char* key) -> std::optional<double> {
        if (!obj.contains(key)) return std::nullopt;
        if (!obj.at(key).is_number()) {
            r.defect(path + "." + key, "expected a number");
            return std::nullopt;
        }
        return obj.at(key).get<double>();
    };
    out.min = read_number("min");
    out.max = read_number("max");
    auto read_count = [&](const char* key) -> std::optional<std::size_t> {
        if (!obj.contains(key)) return std::nullopt;
        if (!obj.at(key).is_number_unsigned() && !obj.at(key).is_number_integer()) {
            r.defect(path + "." + key, "expected a non-negative integer");
            return std::nullopt;
        }
        auto v = obj.at(key).get<long long>();
        if (v < 0) {
            r.defect(path + "." + key, "expected a non-negative integer");
            return std::nullopt;
        }
        return static_cast<std::size_t>(v);
    };
    out.min_items = read_count("min_items");
    out.max_items = read_count("max_items");
    if (obj.contains("format")) out.format = r.get_string(obj, "format", path);
    if (obj.contains("error_label")) out.error_label = r.get_string(obj, "error_label", path);
    return out;
}

ToolSpec spec_from_json(const Json& doc, std::vector<Defect>& defects) {
    ToolSpec spec;
    Reader r{defects};
    if (!doc.is_object()) {
        r.defect("", "document must be a JSON object");
        return spec;
    }
    spec.name = r.get_string(doc, "name", "");
    spec.description = r.get_string(doc, "description", "");
    spec.usage = r.get_string(doc, "usage", "");

    if (doc.contains("parameters") && doc.at("parameters").is_array()) {
        std::size_t i = 0;
        for (const auto& p : doc.at("parameters")) {
            std::string path = "parameters[" + std::to_string(i++) + "]";
            ParameterSpec param;
            param.name = r.get_string(p, "name", path);
            std::string kind_text = r.get_string(p, "kind", path);
            if (auto kind = kind_from_string(kind_text)) {
                param.kind = *kind;
            } else if (!kind_text.empty()) {
                r.defect(path + ".kind", "unknown kind '" + kind_text + "'");
            }
            if (p.contains("required")) {
                if (p.at("required").is_boolean()) {
                    param.required = p.at("required").get<bool>();
                } else {
                    r.defect(path + ".required", "expected a boolean");
                }
            }
            if (p.contains("default")) param.default_value = p.at("default");
            if (p.contains("constraints")) {
                param.constraints = parse_constraints(p.at("constraints"), path + ".constraints", r);
            }
            spec.parameters.push_back(std::move(param));
        }
    } else if (doc.contains("parameters")) {
        r.defect("parameters", "expected an array");
    } else {
        r.defect("", "missing field 'parameters'");
    }

    if (doc.contains("failure_modes") && doc.at("failure_modes").is_array()) {
        std::size_t i = 0;
        for (const auto& e : doc.at("failure_modes")) {
            std::string path = "failure_modes[" + std::to_string(i++) + "]";
            ErrorSpec err;
            err.label = r.get_string(e, "label", path);
            err.message = r.get_string(e, "message", path);
            err.trigger = r.get_string(e, "trigger", path, false);
            spec.failure_modes.push_back(std::move(err));
        }
    } else if (doc.contains("failure_modes")) {
        r.defect("failure_modes", "expected an array");
    }

    if (doc.contains("output_schema") && doc.at("output_schema").is_array()) {
        std::size_t i = 0;
        for (const auto& f : doc.at("output_schema")) {
            std::string path = "output_schema[" + std::to_string(i++) + "]";
            OutputFieldSpec field;
            field.name = r.get_string(f, "name", path);
            std::string kind_text = r.get_string(f, "kind", path);
            if (auto kind = kind_from_string(kind_text)) {
                field.kind = *kind;
            } else if (!kind_text.empty()) {
                r.defect(path + ".kind", "unknown kind '" + kind_text + "'");
            }
            field.description = r.get_string(f, "description", path, false);
            spec.output_schema.push_back(std::move(field));
        }
    } else if (doc.contains("output_schema")) {
        r.defect("output_schema", "expected an array");
    }

    if (doc.contains("provenance")) {
        const auto& prov = doc.at("provenance");
        if (prov.is_object()) {
            spec.provenance.field = r.get_string(prov, "field", "provenance", false);
            spec.provenance.subdomain = r.get_string(prov, "subdomain", "provenance", false);
            spec.provenance.task = r.get_string(prov, "task", "provenance", false);
        } else {
            r.defect("provenance", "expected an object");
        }
    }
    spec.consumes = r.get_string_list(doc, "consumes", "");
    spec.produces = r.get_string_list(doc, "produces", "");

    if (doc.contains("cross_field_rules") && doc.at("cross_field_rules").is_array()) {
        std::size_t i = 0;
        for (const auto& c : doc.at("cross_field_rules")) {
            std::string path = "cross_field_rules[" + std::to_string(i++) + "]";
            CrossFieldRule rule;
            std::string kind_text = r.get_string(c, "kind", path);
            if (auto kind = rule_kind_from_string(kind_text)) {
                rule.kind = *kind;
            } else if (!kind_text.empty()) {
                r.defect(path + ".kind", "unknown rule kind '" + kind_text + "'");
            }
            rule.params = r.get_string_list(c, "params", path);
            rule.message = r.get_string(c, "message", path, false);
            spec.cross_field_rules.push_back(std::move(rule));
        }
    } else if (doc.contains("cross_field_rules")) {
        r.defect("cross_field_rules", "expected an array");
    }
    return spec;
}

}  // namespace

std::vector<Defect> validate_spec(const ToolSpec& spec) {
    std::vector<Defect> defects;
    auto defect = [&](std::string path, std::string message) {
        defects.push_back({std::move(path), std::move(message)});
    };

    if (normalize_name(spec.name).empty()) {
        defect("name", "unnameable: no alphanumeric content");
    }

    std::set<std::string> seen_params;
    std::size_t i = 0;
    for (const auto& p : spec.parameters) {
        std::string path = "parameters[" + std::to_string(i++) + "]";
        if (p.name.empty()) defect(path, "parameter name empty");
        if (!seen_params.insert(p.name).second) {
            defect(path, "duplicate parameter name '" + p.name + "'");
        }
        if (p.required && p.default_value) {
            defect(path, "required parameter '" + p.name + "' carries a default");
        }
        if (p.default_value && !value_conforms(*p.default_value, p.kind)) {
            defect(path, "default for '" + p.name + "' does not conform to kind " +
                             kind_to_string(p.kind));
        }
        const auto& c = p.constraints;
        for (const auto& ev : c.enum_values) {
            if (!value_conforms(ev, ValueKind{p.kind.base, false})) {
                defect(path + ".constraints.enum",
                       "enum value does not conform to kind " + kind_to_string(p.kind));
            }
        }
        if (c.min && c.max && *c.min > *c.max) {
            defect(path + ".constraints", "min exceeds max");
        }
        if (c.min_items && c.max_items && *c.min_items > *c.max_items) {
            defect(path + ".constraints", "min_items exceeds max_items");
        }
        if ((c.min_items || c.max_items) && !p.kind.is_array) {
            defect(path + ".constraints", "item bounds on non-array parameter '" + p.name + "'");
        }
        if (c.format && (p.kind.is_array || p.kind.base != BaseKind::String)) {
            defect(path + ".constraints", "format tag on non-string parameter '" + p.name + "'");
        }
    }

    if (spec.failure_modes.empty()) {
        defect("failure_modes", "failure_modes empty");
    }
    i = 0;
    for (const auto& e : spec.failure_modes) {
        std::string path = "failure_modes[" + std::to_string(i++) + "]";
        if (e.message.empty()) defect(path, "message empty");
    }

    std::set<std::string> seen_outputs;
    i = 0;
    for (const auto& f : spec.output_schema) {
        std::string path = "output_schema[" + std::to_string(i++) + "]";
        if (f.name.empty()) defect(path, "output field name empty");
        if (!seen_outputs.insert(f.name).second) {
            defect(path, "duplicate output field name '" + f.name + "'");
        }
    }

    i = 0;
    for (const auto& rule : spec.cross_field_rules) {
        std::string path = "cross_field_rules[" + std::to_string(i++) + "]";
        for (const auto& ref : rule.params) {
            if (!spec.find_parameter(ref)) {
                defect(path, "unknown parameter reference '" + ref + "'");
            }
        }
        std::size_t arity_min = rule.kind == RuleKind::AtLeastOne ? 1 : 2;
        if (rule.params.size() < arity_min) {
            defect(path, "rule needs at least " + std::to_string(arity_min) + " parameters");
        }
    }
    return defects;
}

ParseOutcome parse_tool_spec(const std::string& document) {
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::parse_error& e) {
        return {std::nullopt, {{"", std::string("malformed document: ") + e.what()}}};
    }
    return parse_tool_spec(doc);
}

ParseOutcome parse_tool_spec(const Json& document) {
    std::vector<Defect> defects;
    ToolSpec spec = spec_from_json(document, defects);
    if (defects.empty()) {
        auto semantic = validate_spec(spec);
        defects.insert(defects.end(), semantic.begin(), semantic.end());
    }
    if (!defects.empty()) return {std::nullopt, std::move(defects)};
    return {std::move(spec), {}};
}

namespace {

Json kind_json(ValueKind kind) { return kind_to_string(kind); }

Json constraints_json(const ConstraintSet& c) {
    Json out = Json::object();
    if (!c.enum_values.empty()) out["enum"] = c.enum_values;
    if (c.min) out["min"] = *c.min;
    if (c.max) out["max"] = *c.max;
    if (c.min_items) out["min_items"] = *c.min_items;
    if (c.max_items) out["max_items"] = *c.max_items;
    if (c.format) out["format"] = *c.format;
    if (c.error_label) out["error_label"] = *c.error_label;
    return out;
}

Json parameters_json(const std::vector<ParameterSpec>& params) {
    Json out = Json::array();
    for (const auto& p : params) {
        Json item = Json::object();
        item["name"] = p.name;
        item["kind"] = kind_json(p.kind);
        item["required"] = p.required;
        if (p.default_value) item["default"] = *p.default_value;
        if (!p.constraints.empty() || p.constraints.error_label) {
            item["constraints"] = constraints_json(p.constraints);
        }
        out.push_back(std::move(item));
    }
    return out;
}

Json output_schema_json(const std::vector<OutputFieldSpec>& fields) {
    Json out = Json::array();
    for (const auto& f : fields) {
        out.push_back(Json{{"name", f.name}, {"kind", kind_json(f.kind)}, {"description", f.description}});
    }
    return out;
}

}  // namespace

Json spec_to_json(const ToolSpec& spec) {
    Json doc = Json::object();
    doc["name"] = spec.name;
    doc["description"] = spec.description;
    doc["parameters"] = parameters_json(spec.parameters);
    doc["usage"] = spec.usage;
    Json failures = Json::array();
    for (const auto& e : spec.failure_modes) {
        failures.push_back(Json{{"label", e.label}, {"message", e.message}, {"trigger", e.trigger}});
    }
    doc["failure_modes"] = std::move(failures);
    doc["output_schema"] = output_schema_json(spec.output_schema);
    doc["provenance"] = Json{{"field", spec.provenance.field},
                             {"subdomain", spec.provenance.subdomain},
                             {"task", spec.provenance.task}};
    doc["consumes"] = spec.consumes;
    doc["produces"] = spec.produces;
    Json rules = Json::array();
    for (const auto& r : spec.cross_field_rules) {
        rules.push_back(Json{{"kind", rule_kind_to_string(r.kind)},
                             {"params", r.params},
                             {"message", r.message}});
    }
    doc["cross_field_rules"] = std::move(rules);
    return doc;
}

std::string canonical_serialize(const ToolSpec& spec) {
    return spec_to_json(spec).dump();
}

std::string canonical_body(const ToolSpec& spec) {
    Json body = Json::object();
    body["description"] = spec.description;
    body["parameters"] = parameters_json(spec.parameters);
    body["usage"] = spec.usage;
    body["output_schema"] = output_schema_json(spec.output_schema);
    return body.dump();
}

std::string embedding_text(const ToolSpec& spec) {
    Json text = Json::object();
    text["name"] = normalize_name(spec.name);
    text["body"] = Json::parse(canonical_body(spec));
    return text.dump();
}

}  // namespace synthtools::toolspec
