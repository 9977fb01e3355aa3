#pragma once

#include "synthtools/gateway.hpp"

#include <cstdint>

namespace synthtools::gateway {

// Offline completion provider for mock-backend runs. It reads the CONTEXT
// header every prompt template carries and answers each stage with
// mechanically derived, fully deterministic content: fabricated domain
// hierarchies and tool specs for generation, metadata-consistent envelopes
// for simulation, and a strict mechanical verdict for judging. Live and
// mock runs exercise identical pipeline code; only the completions differ.
class DeterministicMockBackend : public Backend {
  public:
    explicit DeterministicMockBackend(std::uint64_t seed = 0) : seed_(seed) {}

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }

  private:
    std::uint64_t seed_;
};

}  // namespace synthtools::gateway
