#include "synthtools/metadata.hpp"

#include <set>

namespace synthtools::sim {

using toolspec::Defect;
using toolspec::normalize_name;

const Json* MetadataTable::find_record(const Json& key_value) const {
    for (const auto& record : records) {
        if (record.is_object() && record.contains(key_field) && record.at(key_field) == key_value) {
            return &record;
        }
    }
    return nullptr;
}

Json Metadata::to_json() const {
    Json tables_json = Json::object();
    for (const auto& [name, table] : tables) {
        tables_json[name] = table.records;
    }
    Json scalars_json = Json::object();
    for (const auto& [name, value] : scalars) {
        scalars_json[name] = value;
    }
    return Json{{"tables", tables_json}, {"scalars", scalars_json}};
}

std::string singular_stem(const std::string& table_name) {
    std::string stem = normalize_name(table_name);
    if (stem.ends_with("ies") && stem.size() > 3) {
        return stem.substr(0, stem.size() - 3) + "y";
    }
    if (stem.ends_with("s") && stem.size() > 3 && !stem.ends_with("ss")) {
        return stem.substr(0, stem.size() - 1);
    }
    return stem;
}

namespace {

std::optional<std::string> infer_key_field(const std::string& table_name,
                                           const std::vector<Json>& records) {
    if (records.empty() || !records.front().is_object()) return std::nullopt;
    const Json& first = records.front();
    std::string preferred = singular_stem(table_name) + "_id";
    if (first.contains(preferred)) return preferred;
    for (auto it = first.begin(); it != first.end(); ++it) {
        if (it.key().ends_with("_id")) return it.key();
    }
    if (first.contains("id")) return std::string("id");
    if (first.begin() != first.end()) return first.begin().key();
    return std::nullopt;
}

}  // namespace

MetadataParse parse_metadata(const Json& document) {
    std::vector<Defect> defects;
    Metadata metadata;
    if (!document.is_object()) {
        return {std::nullopt, {{"", "metadata document must be a JSON object"}}};
    }
    if (document.contains("tables")) {
        const Json& tables = document.at("tables");
        if (!tables.is_object()) {
            defects.push_back({"tables", "expected an object"});
        } else {
            for (auto it = tables.begin(); it != tables.end(); ++it) {
                const std::string& name = it.key();
                if (!it.value().is_array()) {
                    defects.push_back({"tables." + name, "expected an array of records"});
                    continue;
                }
                MetadataTable table;
                for (const auto& record : it.value()) {
                    if (!record.is_object()) {
                        defects.push_back({"tables." + name, "record is not an object"});
                        continue;
                    }
                    table.records.push_back(record);
                }
                auto key = infer_key_field(name, table.records);
                if (!key) {
                    if (!table.records.empty()) {
                        defects.push_back({"tables." + name, "cannot infer key field"});
                    }
                    table.key_field = "id";
                } else {
                    table.key_field = *key;
                }
                std::set<Json> seen;
                for (const auto& record : table.records) {
                    if (!record.contains(table.key_field)) {
                        defects.push_back(
                            {"tables." + name, "record missing key field '" + table.key_field + "'"});
                        continue;
                    }
                    if (!seen.insert(record.at(table.key_field)).second) {
                        defects.push_back({"tables." + name,
                                           "duplicate key value " + record.at(table.key_field).dump()});
                    }
                }
                metadata.tables.emplace(name, std::move(table));
            }
        }
    }
    if (document.contains("scalars")) {
        const Json& scalars = document.at("scalars");
        if (!scalars.is_object()) {
            defects.push_back({"scalars", "expected an object"});
        } else {
            for (auto it = scalars.begin(); it != scalars.end(); ++it) {
                metadata.scalars.emplace(it.key(), it.value());
            }
        }
    }
    if (!defects.empty()) return {std::nullopt, std::move(defects)};
    return {std::move(metadata), {}};
}

MetadataParse parse_metadata(const std::string& document) {
    Json doc;
    try {
        doc = Json::parse(document);
    } catch (const Json::parse_error& e) {
        return {std::nullopt, {{"", std::string("malformed document: ") + e.what()}}};
    }
    return parse_metadata(doc);
}

bool argument_names_table_key(const std::string& argument_name, const std::string& table_name,
                              const MetadataTable& table) {
    std::string arg = normalize_name(argument_name);
    std::string key = normalize_name(table.key_field);
    if (arg == key) return true;
    std::string stem_id = singular_stem(table_name) + "_id";
    if (arg == stem_id) return true;
    // Plural array forms: item_ids matches key field item_id.
    if (arg.ends_with("_ids")) {
        std::string singular = arg.substr(0, arg.size() - 1);
        if (singular == key || singular == stem_id) return true;
    }
    return false;
}

}  // namespace synthtools::sim
