#include "orange/gateway.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "orange/errors.hpp"
#include "orange/sql_exec.hpp"

namespace orange {

using nlohmann::json;

void ChatRequest::validate() const {
    if (messages.empty()) throw GatewayError("chat request has no messages");
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& role = messages[i].role;
        if (role == "system") {
            if (i != 0) throw GatewayError("system message must come first");
        } else if (role != "user" && role != "assistant") {
            throw GatewayError("unknown chat role '" + role + "'");
        }
    }
    if (messages.back().role != "user") throw GatewayError("chat request must end with a user message");
}

std::string_view to_string(GatewayMode m) {
    switch (m) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Record: return "record";
        case GatewayMode::Replay: return "replay";
        case GatewayMode::Mock: return "mock";
    }
    return "mock";
}

GatewayMode gateway_mode_from_string(std::string_view s) {
    if (s == "live") return GatewayMode::Live;
    if (s == "record") return GatewayMode::Record;
    if (s == "replay") return GatewayMode::Replay;
    if (s == "mock") return GatewayMode::Mock;
    throw ConfigError("unknown gateway mode '" + std::string(s) + "'");
}

std::string normalize_for_digest(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::string line;
    auto flush = [&] {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        out += line;
        line.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            flush();
            out.push_back('\n');
        } else if (c == '\n') {
            flush();
            out.push_back('\n');
        } else {
            line.push_back(c);
        }
    }
    flush();
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ' || out.back() == '\t')) out.pop_back();
    return out;
}

std::string request_digest(const ChatRequest& req) {
    json doc;
    doc["kind"] = "chat";
    doc["model"] = req.model;
    doc["purpose"] = req.purpose;
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.4f", req.temperature);
    doc["temperature"] = temp;
    doc["seed"] = req.seed ? json(*req.seed) : json(nullptr);
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({m.role, normalize_for_digest(m.content)});
    doc["messages"] = std::move(msgs);
    return sha256_hex(doc.dump());
}

std::string embed_digest(std::string_view model, const std::vector<std::string>& texts) {
    json doc;
    doc["kind"] = "embed";
    doc["model"] = model;
    json items = json::array();
    for (const auto& t : texts) items.push_back(normalize_for_digest(t));
    doc["input"] = std::move(items);
    return sha256_hex(doc.dump());
}

void normalize_l2(Embedding& v) {
    double sq = 0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (!(norm > 0) || !std::isfinite(norm)) throw GatewayError("cannot normalize a zero or non-finite embedding");
    for (double& x : v) x /= norm;
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& base) {
    const auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + base);
    const auto path_start = base.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = base.substr(0, path_start);
    out.prefix = path_start == std::string::npos ? "" : base.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

}  // namespace

HttpEndpoints HttpEndpoints::from_environment() {
    HttpEndpoints e;
    e.chat_base = env_or("ORANGE_CHAT_BASE", "");
    e.chat_key = env_or("ORANGE_CHAT_KEY", "");
    e.chat_model = env_or("ORANGE_CHAT_MODEL", e.chat_model);
    e.embed_base = env_or("ORANGE_EMBED_BASE", e.chat_base);
    e.embed_key = env_or("ORANGE_EMBED_KEY", e.chat_key);
    e.embed_model = env_or("ORANGE_EMBED_MODEL", e.embed_model);
    return e;
}

HttpBackend::HttpBackend(HttpEndpoints endpoints) : endpoints_(std::move(endpoints)) {
    if (endpoints_.chat_base.empty()) throw ConfigError("ORANGE_CHAT_BASE is not set");
    if (endpoints_.embed_base.empty()) endpoints_.embed_base = endpoints_.chat_base;
    if (endpoints_.attempts < 1) endpoints_.attempts = 1;
}

json HttpBackend::post(const std::string& base, const std::string& key, const std::string& path,
                       const json& body) {
    const auto url = split_url(base);
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt < endpoints_.attempts; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(endpoints_.backoff * (1 << (attempt - 1)));
        httplib::Client cli(url.origin);
        cli.set_connection_timeout(endpoints_.request_timeout);
        cli.set_read_timeout(endpoints_.request_timeout);
        httplib::Headers headers;
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
        auto res = cli.Post(url.prefix + path, headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
        } else if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
        } else {
            try {
                return json::parse(res->body);
            } catch (const json::exception& e) {
                last_error = std::string("malformed response body: ") + e.what();
            }
        }
        spdlog::warn("{}{} attempt {} failed: {}", base, path, attempt + 1, last_error);
    }
    throw GatewayError(base + path + " failed after " + std::to_string(endpoints_.attempts) +
                       " attempts: " + last_error);
}

ChatResponse HttpBackend::chat(const ChatRequest& req) {
    json body;
    body["model"] = req.model.empty() ? endpoints_.chat_model : req.model;
    body["temperature"] = req.temperature;
    if (req.seed) body["seed"] = *req.seed;
    body["messages"] = json::array();
    for (const auto& m : req.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const json doc = post(endpoints_.chat_base, endpoints_.chat_key, "/chat/completions", body);
    try {
        ChatResponse out;
        out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (doc.contains("usage")) {
            out.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
            out.completion_tokens = doc["usage"].value("completion_tokens", 0);
        }
        return out;
    } catch (const json::exception& e) {
        throw GatewayError(std::string("unexpected chat response shape: ") + e.what());
    }
}

std::vector<Embedding> HttpBackend::embed(const std::vector<std::string>& texts) {
    json body{{"model", endpoints_.embed_model}, {"input", texts}};
    const json doc = post(endpoints_.embed_base, endpoints_.embed_key, "/embeddings", body);
    try {
        const auto& data = doc.at("data");
        if (data.size() != texts.size()) throw GatewayError("embedding count does not match input count");
        std::vector<Embedding> out(texts.size());
        for (const auto& item : data) {
            const auto idx = item.value("index", static_cast<std::size_t>(&item - &data[0]));
            out.at(idx) = item.at("embedding").get<Embedding>();
        }
        return out;
    } catch (const json::exception& e) {
        throw GatewayError(std::string("unexpected embedding response shape: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cassette

Cassette::Cassette(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(*path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto entry = json::parse(line);
            entries_[entry.at("digest").get<std::string>()].responses.push_back(entry.at("response"));
            if (!embed_model_ && entry.value("kind", "") == "embed")
                embed_model_ = entry.at("request").at("model").get<std::string>();
            ++count_;
        } catch (const json::exception& e) {
            throw LogFormatError(lineno, "cassette " + path_->string() + ": " + e.what());
        }
    }
}

std::optional<json> Cassette::lookup(const std::string& digest) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(digest);
    if (it == entries_.end() || it->second.responses.empty()) return std::nullopt;
    auto& slot = it->second;
    const auto idx = std::min(slot.next, slot.responses.size() - 1);
    if (slot.next < slot.responses.size()) ++slot.next;
    return slot.responses[idx];
}

void Cassette::append(const std::string& kind, const std::string& digest, const json& request,
                      const json& response) {
    std::lock_guard lock(mu_);
    entries_[digest].responses.push_back(response);
    ++count_;
    if (!path_) return;
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::app);
    if (!out) throw IoError("cannot append to cassette " + path_->string());
    json line{{"kind", kind}, {"digest", digest}, {"request", request}, {"response", response}};
    out << line.dump() << '\n';
}

std::optional<std::string> Cassette::embed_model() const {
    std::lock_guard lock(mu_);
    return embed_model_;
}

std::size_t Cassette::size() const {
    std::lock_guard lock(mu_);
    return count_;
}

// ---------------------------------------------------------------------------
// Gateway

struct Gateway::Slot {
    explicit Slot(int n) : sem(n) {}
    std::counting_semaphore<1024> sem;
};

namespace {

json request_json(const ChatRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return {{"model", req.model}, {"purpose", req.purpose}, {"temperature", req.temperature},
            {"seed", req.seed ? json(*req.seed) : json(nullptr)}, {"messages", std::move(msgs)}};
}

json response_json(const ChatResponse& r) {
    return {{"text", r.text}, {"prompt_tokens", r.prompt_tokens}, {"completion_tokens", r.completion_tokens}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.prompt_tokens = j.value("prompt_tokens", 0);
    r.completion_tokens = j.value("completion_tokens", 0);
    return r;
}

}  // namespace

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
    if (options_.max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
    slots_ = std::make_unique<Slot>(options_.max_in_flight);
    switch (options_.mode) {
        case GatewayMode::Replay:
            if (!options_.cassette) throw ConfigError("replay mode needs a cassette file");
            if (!std::filesystem::exists(*options_.cassette))
                throw ConfigError("cassette " + options_.cassette->string() + " does not exist");
            cassette_ = std::make_unique<Cassette>(*options_.cassette);
            options_.upstream.reset();  // replay never talks to a backend
            if (options_.embed_model.empty()) options_.embed_model = cassette_->embed_model().value_or("");
            break;
        case GatewayMode::Record:
            if (!options_.cassette) throw ConfigError("record mode needs a cassette file");
            cassette_ = std::make_unique<Cassette>(*options_.cassette);
            [[fallthrough]];
        case GatewayMode::Live:
        case GatewayMode::Mock:
            if (!options_.upstream) throw ConfigError(std::string(to_string(options_.mode)) + " mode needs a backend");
            break;
    }
}

Gateway::~Gateway() = default;

std::string Gateway::embed_model() const {
    if (!options_.embed_model.empty()) return options_.embed_model;
    return options_.upstream ? options_.upstream->embed_model() : std::string{};
}

void Gateway::count(const std::string& purpose) {
    std::lock_guard lock(count_mu_);
    ++calls_by_purpose_[purpose];
}

std::size_t Gateway::chat_calls(std::string_view prefix) const {
    std::lock_guard lock(count_mu_);
    std::size_t n = 0;
    for (const auto& [purpose, c] : calls_by_purpose_)
        if (purpose.compare(0, prefix.size(), prefix) == 0) n += c;
    return n;
}

ChatResponse Gateway::chat(ChatRequest req) {
    if (req.model.empty()) req.model = options_.chat_model;
    req.validate();
    count(req.purpose);
    const std::string digest = request_digest(req);
    if (options_.mode == GatewayMode::Replay) {
        auto hit = cassette_->lookup(digest);
        if (!hit) throw CassetteMiss(digest);
        return response_from_json(*hit);
    }
    slots_->sem.acquire();
    ChatResponse resp;
    try {
        ++upstream_calls_;
        resp = options_.upstream->chat(req);
    } catch (...) {
        slots_->sem.release();
        throw;
    }
    slots_->sem.release();
    if (options_.mode == GatewayMode::Record) cassette_->append("chat", digest, request_json(req), response_json(resp));
    return resp;
}

std::vector<Embedding> Gateway::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) throw GatewayError("embed_batch needs at least one text");
    const std::string model = embed_model();
    const std::string digest = embed_digest(model, texts);
    std::vector<Embedding> out;
    if (options_.mode == GatewayMode::Replay) {
        auto hit = cassette_->lookup(digest);
        if (!hit) throw CassetteMiss(digest);
        out = hit->get<std::vector<Embedding>>();
    } else {
        slots_->sem.acquire();
        try {
            ++upstream_calls_;
            out = options_.upstream->embed(texts);
        } catch (...) {
            slots_->sem.release();
            throw;
        }
        slots_->sem.release();
        if (out.size() != texts.size()) throw GatewayError("embedding count does not match input count");
        for (auto& v : out) normalize_l2(v);
    }
    if (out.size() != texts.size()) throw GatewayError("embedding count does not match input count");
    if (options_.mode == GatewayMode::Record)
        cassette_->append("embed", digest, json{{"model", model}, {"input", texts}}, out);
    return out;
}

}  // namespace orange
