#include "synthtools/gateway.hpp"

#include "synthtools/rng.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include <chrono>
#include <thread>

namespace synthtools::gateway {

Json CompletionRequest::to_json() const {
    return Json{{"system", system},
                {"prompt", prompt},
                {"temperature", temperature},
                {"max_tokens", max_tokens},
                {"tag", tag}};
}

CompletionRequest CompletionRequest::from_json(const Json& doc) {
    CompletionRequest req;
    req.system = doc.value("system", "");
    req.prompt = doc.value("prompt", "");
    req.temperature = doc.value("temperature", 0.0);
    req.max_tokens = doc.value("max_tokens", 2048);
    req.tag = doc.value("tag", "");
    return req;
}

std::string cassette_key(const CompletionRequest& request) {
    return rng::hex64(rng::fnv1a64(request.to_json().dump()));
}

Cassette Cassette::load(const std::filesystem::path& path) {
    Cassette cassette;
    Json doc = read_json_file(path);
    if (doc.contains("provenance")) {
        cassette.backend_name_ = doc["provenance"].value("backend", "");
        cassette.recorded_at_ = doc["provenance"].value("recorded_at", "");
    }
    for (auto it = doc.at("entries").begin(); it != doc.at("entries").end(); ++it) {
        cassette.entries_[it.key()] = Entry{it.value().at("request"),
                                            it.value().at("completion").get<std::string>()};
    }
    return cassette;
}

void Cassette::save(const std::filesystem::path& path) const {
    Json entries = Json::object();
    for (const auto& [digest, entry] : entries_) {
        entries[digest] = Json{{"request", entry.request}, {"completion", entry.completion}};
    }
    Json doc{{"provenance", Json{{"backend", backend_name_}, {"recorded_at", recorded_at_}}},
             {"entries", entries}};
    write_json_file(path, doc);
}

void Cassette::insert(const CompletionRequest& request, const std::string& completion) {
    std::string digest = cassette_key(request);
    Json request_json = request.to_json();
    auto it = entries_.find(digest);
    if (it != entries_.end()) {
        if (it->second.request != request_json) {
            throw GatewayError("cassette digest collision at " + digest);
        }
        it->second.completion = completion;
        return;
    }
    entries_[digest] = Entry{std::move(request_json), completion};
}

std::optional<std::string> Cassette::lookup(const CompletionRequest& request) const {
    auto it = entries_.find(cassette_key(request));
    if (it == entries_.end()) return std::nullopt;
    return it->second.completion;
}

void Cassette::set_provenance(std::string backend_name, std::string recorded_at) {
    backend_name_ = std::move(backend_name);
    recorded_at_ = std::move(recorded_at);
}

namespace {

class HttpTransport : public Transport {
  public:
    HttpTransport(std::string endpoint, std::string token)
        : endpoint_(std::move(endpoint)), token_(std::move(token)) {}

  private:
    std::string do_post(const CompletionRequest& request) override {
        // Split "http://host:port/path" into client target and path.
        auto scheme_end = endpoint_.find("://");
        std::string rest = scheme_end == std::string::npos ? endpoint_
                                                           : endpoint_.substr(scheme_end + 3);
        auto slash = rest.find('/');
        std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
        std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
        std::string origin =
            (scheme_end == std::string::npos ? "http://" : endpoint_.substr(0, scheme_end + 3)) + host;

        httplib::Client client(origin);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        auto res = client.Post(path, headers, request.to_json().dump(), "application/json");
        if (!res || res->status != 200) {
            throw GatewayError("transport failure: " +
                               (res ? "status " + std::to_string(res->status) : "no response"));
        }
        Json body = Json::parse(res->body);
        return body.at("completion").get<std::string>();
    }

    std::string endpoint_;
    std::string token_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(std::string endpoint, std::string token) {
    return std::make_shared<HttpTransport>(std::move(endpoint), std::move(token));
}

void ScriptedBackend::push(std::string completion) {
    std::lock_guard lock(mutex_);
    global_.push_back(std::move(completion));
}

void ScriptedBackend::push_for_tag(const std::string& tag, std::string completion) {
    std::lock_guard lock(mutex_);
    by_tag_[tag].push_back(std::move(completion));
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    auto it = by_tag_.find(request.tag);
    if (it != by_tag_.end() && !it->second.empty()) {
        std::string out = std::move(it->second.front());
        it->second.pop_front();
        ++consumed_;
        return out;
    }
    if (global_.empty()) {
        throw GatewayError("mock script exhausted for tag '" + request.tag + "'");
    }
    std::string out = std::move(global_.front());
    global_.pop_front();
    ++consumed_;
    return out;
}

std::string ReplayBackend::complete(const CompletionRequest& request) {
    auto hit = cassette_.lookup(request);
    if (!hit) {
        throw GatewayError("unrecorded request: digest " + cassette_key(request) + " tag '" +
                           request.tag + "'");
    }
    return *hit;
}

std::string LiveBackend::complete(const CompletionRequest& request) {
    std::string last_error;
    for (int attempt = 0; attempt < retries_; ++attempt) {
        try {
            return transport_->post(request);
        } catch (const std::exception& e) {
            last_error = e.what();
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
        }
    }
    throw GatewayError("live completion failed after " + std::to_string(retries_) +
                       " attempts: " + last_error);
}

RecordBackend::RecordBackend(std::shared_ptr<Backend> inner, std::filesystem::path cassette_path)
    : inner_(std::move(inner)), path_(std::move(cassette_path)) {
    if (std::filesystem::exists(path_)) {
        cassette_ = Cassette::load(path_);
    }
    auto now = std::chrono::system_clock::now().time_since_epoch();
    cassette_.set_provenance(inner_->name(),
                             std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now).count()));
}

RecordBackend::~RecordBackend() {
    try {
        flush();
    } catch (...) {
    }
}

std::string RecordBackend::complete(const CompletionRequest& request) {
    {
        std::lock_guard lock(mutex_);
        if (auto hit = cassette_.lookup(request)) return *hit;
    }
    std::string completion = inner_->complete(request);
    std::lock_guard lock(mutex_);
    cassette_.insert(request, completion);
    return completion;
}

void RecordBackend::flush() {
    std::lock_guard lock(mutex_);
    cassette_.save(path_);
}

std::string Gateway::complete(const CompletionRequest& request) {
    {
        std::lock_guard lock(mutex_);
        ++tag_counts_[request.tag];
    }
    return backend_->complete(request);
}

RetryResult Gateway::complete_with_retry(const CompletionRequest& request, int max_attempts,
                                         const std::function<bool(const std::string&)>& accept) {
    if (max_attempts < 1) {
        throw GatewayError("max_attempts must be >= 1");
    }
    RetryResult result;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        result.text = complete(request);
        result.attempts = attempt;
        if (accept(result.text)) {
            result.exhausted = false;
            return result;
        }
        result.exhausted = true;
    }
    return result;
}

std::uint64_t Gateway::requests_for_tag(const std::string& tag) const {
    std::lock_guard lock(mutex_);
    auto it = tag_counts_.find(tag);
    return it == tag_counts_.end() ? 0 : it->second;
}

std::string PromptLibrary::render(const std::string& template_name,
                                  const std::map<std::string, std::string>& vars) const {
    auto path = dir_ / (template_name + ".txt");
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw GatewayError(std::string("prompt template missing: ") + e.what());
    }
    for (const auto& [key, value] : vars) {
        std::string token = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = text.find(token, pos)) != std::string::npos) {
            text.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return text;
}

std::string context_header(const Json& context) {
    return "CONTEXT: " + context.dump();
}

std::optional<Json> parse_context_header(const std::string& prompt) {
    constexpr std::string_view marker = "CONTEXT: ";
    auto pos = prompt.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    auto line_end = prompt.find('\n', pos);
    std::string line = prompt.substr(pos + marker.size(),
                                     line_end == std::string::npos ? std::string::npos
                                                                   : line_end - pos - marker.size());
    try {
        return Json::parse(line);
    } catch (const Json::parse_error&) {
        return std::nullopt;
    }
}

}  // namespace synthtools::gateway
