#pragma once

#include "synthtools/gateway.hpp"
#include "synthtools/toolspec.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace synthtools::generation {

struct GenerationPlan {
    std::vector<std::string> fields;
    int subdomains_per_field = 1;
    int tasks_per_subdomain = 1;
    int tools_per_task = 1;
    std::uint64_t seed = 0;
    std::string style_hint;  // free-text stage steering; uncalibrated

    Json to_json() const;
    static GenerationPlan from_json(const Json& doc);
};

struct Corpus {
    std::vector<toolspec::ToolSpec> tools;
    std::map<std::string, std::size_t> index;  // normalized name -> first position
    std::optional<GenerationPlan> plan;

    void rebuild_index();
    const toolspec::ToolSpec* find(const std::string& name) const;
};

// Consistency check over a loaded corpus: index agreement plus uniqueness
// of (normalized name, field) pairs.
std::vector<toolspec::Defect> validate_corpus(const Corpus& corpus);

class GenerationError : public std::runtime_error {
  public:
    GenerationError(std::string what, std::string raw = "")
        : std::runtime_error(std::move(what)), raw_completion(std::move(raw)) {}

    std::string raw_completion;
};

struct StageOptions {
    const gateway::PromptLibrary* prompts = nullptr;
    int max_attempts = 3;
    std::string style_hint;
    std::vector<std::string>* log = nullptr;
};

std::vector<std::string> expand_field(const std::string& field, gateway::Gateway& gateway,
                                      int quota, const StageOptions& options = {});

std::vector<std::string> expand_subdomain(const std::string& field, const std::string& subdomain,
                                          gateway::Gateway& gateway, int quota,
                                          const StageOptions& options = {});

// Every returned spec has passed validation; specs that still fail after
// retries are dropped with a logged defect.
std::vector<toolspec::ToolSpec> instantiate_tools(const std::string& field,
                                                  const std::string& subdomain,
                                                  const std::string& task,
                                                  gateway::Gateway& gateway, int quota,
                                                  const StageOptions& options = {});

// Full hierarchical run. Quotas are hard caps; name collisions within a
// field get numeric suffixes; assembly order is (provenance path, name).
Corpus generate_corpus(const GenerationPlan& plan, gateway::Gateway& gateway,
                       const StageOptions& options = {});

// Corpus directory layout: one JSON document per tool plus an index file
// listing relative paths in corpus order.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace synthtools::generation
