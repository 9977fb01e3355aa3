#pragma once

#include "synthtools/jsonio.hpp"
#include "synthtools/toolspec.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synthtools::sim {

// Entity table: a list of records sharing a designated key field whose
// values are unique within the table.
struct MetadataTable {
    std::string key_field;
    std::vector<Json> records;  // each a JSON object

    const Json* find_record(const Json& key_value) const;
};

// Task-state world model: entity tables plus free scalars. Immutable in
// the simulator; sessions own mutable copies.
struct Metadata {
    std::map<std::string, MetadataTable> tables;
    std::map<std::string, Json> scalars;

    bool empty() const { return tables.empty() && scalars.empty(); }

    Json to_json() const;
};

struct MetadataParse {
    std::optional<Metadata> metadata;
    std::vector<toolspec::Defect> defects;

    bool ok() const { return metadata.has_value(); }
};

// File format: {"tables": {"Patients": [ {...}, ... ]}, "scalars": {...}}.
// The key field of each table is inferred: the field named after the
// singular table name plus "_id", else the first *_id field in sorted
// order, else "id", else the first field. Inference failures and duplicate
// key values are reported as defects.
MetadataParse parse_metadata(const Json& document);
MetadataParse parse_metadata(const std::string& document);

// "Return Requests" -> "return_request"; used for key-field inference and
// for matching argument names like "return_request_id" to their table.
std::string singular_stem(const std::string& table_name);

// True when the argument name designates keys of this table: it equals the
// table's key field, the singular stem + "_id", or their plural "_ids"
// forms for array-valued arguments.
bool argument_names_table_key(const std::string& argument_name, const std::string& table_name,
                              const MetadataTable& table);

}  // namespace synthtools::sim
