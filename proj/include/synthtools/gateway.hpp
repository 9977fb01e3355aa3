#pragma once

#include "synthtools/jsonio.hpp"

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace synthtools::gateway {

struct CompletionRequest {
    std::string system;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 2048;
    std::string tag;  // calling stage: generation|simulation|judge|task|agent

    Json to_json() const;
    static CompletionRequest from_json(const Json& doc);
};

class GatewayError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Stable content digest over every request field. Equal requests map to
// equal digests; collisions are caught at cassette insert time because the
// full request is stored alongside each entry.
std::string cassette_key(const CompletionRequest& request);

class Cassette {
  public:
    Cassette() = default;

    static Cassette load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Throws GatewayError on digest collision (same key, different request).
    void insert(const CompletionRequest& request, const std::string& completion);
    std::optional<std::string> lookup(const CompletionRequest& request) const;

    std::size_t size() const { return entries_.size(); }
    void set_provenance(std::string backend_name, std::string recorded_at);

  private:
    struct Entry {
        Json request;
        std::string completion;
    };
    std::map<std::string, Entry> entries_;
    std::string backend_name_;
    std::string recorded_at_;
};

// Seam for live HTTP traffic. Tests inject counting fakes here to prove
// that replay mode never touches the network.
class Transport {
  public:
    virtual ~Transport() = default;

    std::string post(const CompletionRequest& request) {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return do_post(request);
    }
    std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

  private:
    virtual std::string do_post(const CompletionRequest& request) = 0;
    std::atomic<std::uint64_t> calls_{0};
};

// POSTs {system,prompt,temperature,max_tokens,tag} to the configured
// endpoint and expects {"completion": "..."} back.
std::shared_ptr<Transport> make_http_transport(std::string endpoint, std::string token);

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
    virtual void flush() {}
};

// FIFO-scripted completions, optionally segregated by tag. A read past the
// end of the script throws.
class ScriptedBackend : public Backend {
  public:
    void push(std::string completion);
    void push_for_tag(const std::string& tag, std::string completion);

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }

    std::size_t consumed() const { return consumed_; }

  private:
    std::mutex mutex_;
    std::deque<std::string> global_;
    std::map<std::string, std::deque<std::string>> by_tag_;
    std::size_t consumed_ = 0;
};

// Mock driven by a callable; used by the deterministic offline provider.
class HandlerBackend : public Backend {
  public:
    using Handler = std::function<std::string(const CompletionRequest&)>;

    explicit HandlerBackend(Handler handler, std::string backend_name = "mock")
        : handler_(std::move(handler)), name_(std::move(backend_name)) {}

    std::string complete(const CompletionRequest& request) override { return handler_(request); }
    std::string name() const override { return name_; }

  private:
    Handler handler_;
    std::string name_;
};

class ReplayBackend : public Backend {
  public:
    explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "replay"; }

  private:
    Cassette cassette_;
};

class LiveBackend : public Backend {
  public:
    LiveBackend(std::shared_ptr<Transport> transport, int transport_retries = 3)
        : transport_(std::move(transport)), retries_(transport_retries) {}

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "live"; }

  private:
    std::shared_ptr<Transport> transport_;
    int retries_;
};

class RecordBackend : public Backend {
  public:
    RecordBackend(std::shared_ptr<Backend> inner, std::filesystem::path cassette_path);
    ~RecordBackend() override;

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "record"; }
    void flush() override;

  private:
    std::mutex mutex_;
    std::shared_ptr<Backend> inner_;
    std::filesystem::path path_;
    Cassette cassette_;
};

struct RetryResult {
    std::string text;
    int attempts = 0;
    bool exhausted = false;
};

// Uniform boundary for model calls. Shareable across threads; completions
// are serialized per backend rules, counters per calling stage.
class Gateway {
  public:
    explicit Gateway(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}

    std::string complete(const CompletionRequest& request);

    // Returns the first completion satisfying `accept`, or the last one
    // with the exhausted flag set. max_attempts must be >= 1.
    RetryResult complete_with_retry(const CompletionRequest& request, int max_attempts,
                                    const std::function<bool(const std::string&)>& accept);

    std::uint64_t requests_for_tag(const std::string& tag) const;
    std::string backend_name() const { return backend_->name(); }
    void flush() { backend_->flush(); }

  private:
    std::shared_ptr<Backend> backend_;
    mutable std::mutex mutex_;
    std::map<std::string, std::uint64_t> tag_counts_;
};

// Prompt templates are data files, one per stage, rendered by replacing
// {{placeholder}} tokens.
class PromptLibrary {
  public:
    explicit PromptLibrary(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::string render(const std::string& template_name,
                       const std::map<std::string, std::string>& vars) const;

  private:
    std::filesystem::path dir_;
};

// A machine-readable header carried on the first line of every rendered
// prompt ("CONTEXT: {...}"). Live models may ignore it; the deterministic
// offline provider parses it.
std::string context_header(const Json& context);
std::optional<Json> parse_context_header(const std::string& prompt);

}  // namespace synthtools::gateway
