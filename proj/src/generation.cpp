#include "synthtools/generation.hpp"

#include <algorithm>
#include <set>

namespace synthtools::generation {

using toolspec::Defect;
using toolspec::ToolSpec;
using toolspec::normalize_name;

Json GenerationPlan::to_json() const {
    return Json{{"fields", fields},
                {"subdomains_per_field", subdomains_per_field},
                {"tasks_per_subdomain", tasks_per_subdomain},
                {"tools_per_task", tools_per_task},
                {"seed", seed},
                {"style_hint", style_hint}};
}

GenerationPlan GenerationPlan::from_json(const Json& doc) {
    GenerationPlan plan;
    if (doc.contains("fields")) plan.fields = doc.at("fields").get<std::vector<std::string>>();
    plan.subdomains_per_field = doc.value("subdomains_per_field", 1);
    plan.tasks_per_subdomain = doc.value("tasks_per_subdomain", 1);
    plan.tools_per_task = doc.value("tools_per_task", 1);
    plan.seed = doc.value("seed", std::uint64_t{0});
    plan.style_hint = doc.value("style_hint", "");
    return plan;
}

void Corpus::rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < tools.size(); ++i) {
        index.emplace(normalize_name(tools[i].name), i);
    }
}

const ToolSpec* Corpus::find(const std::string& name) const {
    auto it = index.find(normalize_name(name));
    if (it == index.end()) return nullptr;
    return &tools[it->second];
}

std::vector<Defect> validate_corpus(const Corpus& corpus) {
    std::vector<Defect> defects;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& tool : corpus.tools) {
        auto key = std::make_pair(normalize_name(tool.name), tool.provenance.field);
        if (!seen.insert(key).second) {
            defects.push_back({"tools", "duplicate (name, field): " + key.first + " in '" +
                                            key.second + "'"});
        }
    }
    for (const auto& [name, pos] : corpus.index) {
        if (pos >= corpus.tools.size() || normalize_name(corpus.tools[pos].name) != name) {
            defects.push_back({"index", "index entry '" + name + "' inconsistent"});
        }
    }
    return defects;
}

namespace {

bool parse_string_list(const std::string& text, std::vector<std::string>& out) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error&) {
        return false;
    }
    if (!doc.is_array() || doc.empty()) return false;
    std::vector<std::string> items;
    for (const auto& item : doc) {
        if (!item.is_string() || item.get<std::string>().empty()) return false;
        items.push_back(item.get<std::string>());
    }
    out = std::move(items);
    return true;
}

std::vector<std::string> distinct_preserving_order(std::vector<std::string> items, int quota) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (auto& item : items) {
        if (seen.insert(normalize_name(item)).second) {
            out.push_back(std::move(item));
            if (static_cast<int>(out.size()) == quota) break;
        }
    }
    return out;
}

std::vector<std::string> run_list_stage(const std::string& template_name, const Json& context,
                                        const std::map<std::string, std::string>& vars,
                                        gateway::Gateway& gateway_ref, int quota,
                                        const StageOptions& options) {
    gateway::CompletionRequest request;
    request.tag = "generation";
    request.temperature = 0.2;
    if (options.prompts) {
        auto all_vars = vars;
        all_vars["context"] = gateway::context_header(context);
        request.prompt = options.prompts->render(template_name, all_vars);
    } else {
        request.prompt = gateway::context_header(context) +
                         "\nRespond with a JSON array of name strings and nothing else.";
    }

    std::vector<std::string> items;
    auto accept = [&](const std::string& text) { return parse_string_list(text, items); };
    auto result = gateway_ref.complete_with_retry(request, options.max_attempts, accept);
    if (result.exhausted) {
        throw GenerationError("stage '" + template_name + "' produced no parseable list after " +
                                  std::to_string(result.attempts) + " attempts",
                              result.text);
    }
    auto kept = distinct_preserving_order(std::move(items), quota);
    if (options.log && static_cast<int>(kept.size()) < quota) {
        options.log->push_back("stage '" + template_name + "' under-generated: " +
                               std::to_string(kept.size()) + "/" + std::to_string(quota));
    }
    return kept;
}

}  // namespace

std::vector<std::string> expand_field(const std::string& field, gateway::Gateway& gateway_ref,
                                      int quota, const StageOptions& options) {
    if (field.empty()) throw GenerationError("field name is empty");
    Json context{{"stage", "subdomains"},
                 {"field", field},
                 {"count", quota},
                 {"style", options.style_hint}};
    return run_list_stage("subdomains", context,
                          {{"field", field}, {"count", std::to_string(quota)},
                           {"style", options.style_hint}},
                          gateway_ref, quota, options);
}

std::vector<std::string> expand_subdomain(const std::string& field, const std::string& subdomain,
                                          gateway::Gateway& gateway_ref, int quota,
                                          const StageOptions& options) {
    if (field.empty() || subdomain.empty()) {
        throw GenerationError("field/subdomain name is empty");
    }
    Json context{{"stage", "tasks"},
                 {"field", field},
                 {"subdomain", subdomain},
                 {"count", quota},
                 {"style", options.style_hint}};
    return run_list_stage("tasks", context,
                          {{"field", field}, {"subdomain", subdomain},
                           {"count", std::to_string(quota)}, {"style", options.style_hint}},
                          gateway_ref, quota, options);
}

std::vector<ToolSpec> instantiate_tools(const std::string& field, const std::string& subdomain,
                                        const std::string& task, gateway::Gateway& gateway_ref,
                                        int quota, const StageOptions& options) {
    if (field.empty() || subdomain.empty() || task.empty()) {
        throw GenerationError("domain path component is empty");
    }
    Json context{{"stage", "tools"},
                 {"field", field},
                 {"subdomain", subdomain},
                 {"task", task},
                 {"count", quota},
                 {"style", options.style_hint}};

    gateway::CompletionRequest request;
    request.tag = "generation";
    request.temperature = 0.2;
    if (options.prompts) {
        request.prompt = options.prompts->render(
            "tools", {{"context", gateway::context_header(context)},
                      {"field", field},
                      {"subdomain", subdomain},
                      {"task", task},
                      {"count", std::to_string(quota)},
                      {"style", options.style_hint}});
    } else {
        request.prompt = gateway::context_header(context) +
                         "\nRespond with a JSON array of tool specification objects and nothing else.";
    }

    Json doc;
    auto accept = [&](const std::string& text) {
        try {
            doc = Json::parse(text);
        } catch (const Json::parse_error&) {
            return false;
        }
        return doc.is_array() && !doc.empty();
    };
    auto result = gateway_ref.complete_with_retry(request, options.max_attempts, accept);
    if (result.exhausted) {
        throw GenerationError("tool stage produced no parseable array after " +
                                  std::to_string(result.attempts) + " attempts",
                              result.text);
    }

    std::vector<ToolSpec> tools;
    for (const auto& item : doc) {
        Json with_provenance = item;
        with_provenance["provenance"] =
            Json{{"field", field}, {"subdomain", subdomain}, {"task", task}};
        auto outcome = toolspec::parse_tool_spec(with_provenance);
        if (!outcome.ok()) {
            if (options.log) {
                std::string name = item.is_object() ? item.value("name", "<unnamed>") : "<unnamed>";
                std::string detail;
                for (const auto& d : outcome.defects) {
                    if (!detail.empty()) detail += "; ";
                    detail += d.path.empty() ? d.message : d.path + ": " + d.message;
                }
                options.log->push_back("dropped invalid tool '" + name + "' under '" + task +
                                       "': " + detail);
            }
            continue;
        }
        tools.push_back(std::move(*outcome.spec));
        if (static_cast<int>(tools.size()) == quota) break;
    }
    if (options.log && static_cast<int>(tools.size()) < quota) {
        options.log->push_back("task '" + task + "' under-generated: " +
                               std::to_string(tools.size()) + "/" + std::to_string(quota));
    }
    return tools;
}

Corpus generate_corpus(const GenerationPlan& plan, gateway::Gateway& gateway_ref,
                       const StageOptions& options) {
    if (plan.fields.empty() || plan.subdomains_per_field < 1 || plan.tasks_per_subdomain < 1 ||
        plan.tools_per_task < 1) {
        throw GenerationError("invalid plan: empty fields or non-positive quota");
    }
    StageOptions stage_options = options;
    if (stage_options.style_hint.empty()) stage_options.style_hint = plan.style_hint;

    Corpus corpus;
    corpus.plan = plan;
    std::map<std::pair<std::string, std::string>, int> name_uses;  // (field, name) -> count

    for (const auto& field : plan.fields) {
        std::vector<ToolSpec> field_tools;
        auto subdomains = expand_field(field, gateway_ref, plan.subdomains_per_field, stage_options);
        for (const auto& subdomain : subdomains) {
            auto tasks = expand_subdomain(field, subdomain, gateway_ref, plan.tasks_per_subdomain,
                                          stage_options);
            for (const auto& task : tasks) {
                auto tools = instantiate_tools(field, subdomain, task, gateway_ref,
                                               plan.tools_per_task, stage_options);
                for (auto& tool : tools) field_tools.push_back(std::move(tool));
            }
        }
        for (auto& tool : field_tools) {
            auto key = std::make_pair(field, normalize_name(tool.name));
            int uses = ++name_uses[key];
            if (uses > 1) {
                if (options.log) {
                    options.log->push_back("renamed colliding tool '" + tool.name + "' in field '" +
                                           field + "' with suffix _" + std::to_string(uses));
                }
                tool.name += " " + std::to_string(uses);
            }
            corpus.tools.push_back(std::move(tool));
        }
    }

    std::stable_sort(corpus.tools.begin(), corpus.tools.end(),
                     [](const ToolSpec& a, const ToolSpec& b) {
                         auto key = [](const ToolSpec& t) {
                             return std::tie(t.provenance.field, t.provenance.subdomain,
                                             t.provenance.task, t.name);
                         };
                         return key(a) < key(b);
                     });
    corpus.rebuild_index();
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    Json listing = Json::array();
    std::map<std::string, int> path_uses;
    for (const auto& tool : corpus.tools) {
        std::string field_slug = normalize_name(tool.provenance.field);
        if (field_slug.empty()) field_slug = "unfiled";
        std::string rel = field_slug + "/" + normalize_name(tool.name) + ".json";
        int uses = ++path_uses[rel];
        if (uses > 1) {
            rel = field_slug + "/" + normalize_name(tool.name) + "_" + std::to_string(uses) +
                  ".json";
        }
        write_text_file(dir / rel, toolspec::canonical_serialize(tool) + "\n");
        listing.push_back(rel);
    }
    Json index{{"tools", listing}};
    if (corpus.plan) index["plan"] = corpus.plan->to_json();
    write_json_file(dir / "index.json", index);
}

Corpus load_corpus(const std::filesystem::path& dir) {
    Corpus corpus;
    Json index = read_json_file(dir / "index.json");
    if (index.contains("plan")) corpus.plan = GenerationPlan::from_json(index.at("plan"));
    for (const auto& rel : index.at("tools")) {
        auto outcome = toolspec::parse_tool_spec(read_text_file(dir / rel.get<std::string>()));
        if (!outcome.ok()) {
            std::string detail;
            for (const auto& d : outcome.defects) {
                if (!detail.empty()) detail += "; ";
                detail += d.message;
            }
            throw GenerationError("invalid tool document " + rel.get<std::string>() + ": " + detail);
        }
        corpus.tools.push_back(std::move(*outcome.spec));
    }
    corpus.rebuild_index();
    return corpus;
}

}  // namespace synthtools::generation
