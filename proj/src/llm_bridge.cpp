#include "receval/llm_bridge.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <semaphore>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <json.hpp>

namespace receval {

using nlohmann::json;

PromptKind prompt_kind_from_string(const std::string& tag) {
    if (tag == "zero-shot") return PromptKind::zero_shot;
    if (tag == "few-shot") return PromptKind::few_shot;
    if (tag == "chain-of-thought") return PromptKind::chain_of_thought;
    if (tag == "role-playing") return PromptKind::role_playing;
    throw UsageError("unknown prompt kind '" + tag + "'");
}

std::string to_string(PromptKind kind) {
    switch (kind) {
        case PromptKind::zero_shot: return "zero-shot";
        case PromptKind::few_shot: return "few-shot";
        case PromptKind::chain_of_thought: return "chain-of-thought";
        case PromptKind::role_playing: return "role-playing";
    }
    return "?";
}

namespace {

const char* kFewShotDemonstrations =
    "User's Watched Movie: \"The Shawshank Redemption\"\n"
    "User's Rating: 5 (out of 5)\n"
    "Recommended Movie: \"The Green Mile\"\n"
    "Explanation: Both movies are critically acclaimed drama films with themes of hope and "
    "resilience in difficult circumstances. Since the user highly rated \"The Shawshank "
    "Redemption\", they might also enjoy \"The Green Mile\".\n"
    "\n"
    "User's Watched Movie: \"Inception\"\n"
    "User's Rating: 4\n"
    "Recommended Movie: \"Interstellar\"\n"
    "Explanation: Both movies are science-fiction films directed by Christopher Nolan, known for "
    "their mind-bending plots and impressive visuals. A user who enjoyed \"Inception\" is likely "
    "to appreciate \"Interstellar\" as well.\n";

}  // namespace

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const std::vector<std::string>& history) {
    if (history.empty()) throw DataError("render_prompt: empty history");

    RenderedPrompt out;
    std::vector<std::string> kept = history;
    if (tmpl.history_char_budget > 0) {
        auto joined_len = [&]() {
            size_t len = 0;
            for (const auto& h : kept) len += h.size();
            if (!kept.empty()) len += 2 * (kept.size() - 1);  // ", " separators
            return len;
        };
        while (kept.size() > 1 && joined_len() > tmpl.history_char_budget) {
            kept.erase(kept.begin());  // oldest first
            ++out.dropped_items;
        }
        out.truncated = out.dropped_items > 0;
    }
    std::string joined;
    for (size_t i = 0; i < kept.size(); ++i) {
        if (i) joined += ", ";
        joined += kept[i];
    }
    const std::string n = std::to_string(tmpl.list_length);

    switch (tmpl.kind) {
        case PromptKind::role_playing:
            out.text = "Given a user, as a Recommender System, please provide only the names of "
                       "the top " + n + " recommendations.\n"
                       "You know that the user likes the following items: " + joined;
            break;
        case PromptKind::zero_shot:
            out.text = "I like " + joined + ", provide me " + n + " recommendations.";
            break;
        case PromptKind::few_shot:
            out.text = std::string(kFewShotDemonstrations) + "\n" +
                       "The user likes the following items: " + joined + "\n" +
                       "Provide only the names of the top " + n + " recommended items.";
            break;
        case PromptKind::chain_of_thought:
            out.text = "Instruction: Recommend items based on the user's preferences.\n\n"
                       "User's Preferences: The user likes the following items: " + joined + "\n\n"
                       "Chain of Thought: To recommend suitable items, consider what the items "
                       "the user likes have in common.\n"
                       "1. Identify the shared genres or themes among the user's items.\n"
                       "2. Find items known for similar qualities.\n"
                       "3. Rank the candidates by how well they fit those preferences.\n\n"
                       "Provide only the names of the top " + n + " recommendations.";
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

std::string sha256_hex(const std::string& data) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string replay_key(const ChatRequest& request) {
    std::string canonical =
        request.model + "\n" + format_double(request.temperature) + "\n" + request.prompt;
    return sha256_hex(canonical);
}

TranscriptCache::TranscriptCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path TranscriptCache::path_for(const std::string& key) const {
    return root_ / key.substr(0, 2) / (key + ".json");
}

std::optional<ChatTranscript> TranscriptCache::load(const std::string& key) const {
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("corrupt transcript " + path_for(key).string() + ": " + e.what());
    }
    ChatTranscript t;
    t.request.model = doc.at("model").get<std::string>();
    t.request.temperature = doc.at("temperature").get<double>();
    t.request.prompt = doc.at("prompt").get<std::string>();
    t.response = doc.at("response").get<std::string>();
    t.timestamp = doc.value("timestamp", "");
    t.key = doc.at("key").get<std::string>();
    return t;
}

void TranscriptCache::store(const ChatTranscript& transcript) const {
    std::filesystem::path target = path_for(transcript.key);
    std::filesystem::create_directories(target.parent_path());

    json doc;
    doc["key"] = transcript.key;
    doc["model"] = transcript.request.model;
    doc["temperature"] = transcript.request.temperature;
    doc["prompt"] = transcript.request.prompt;
    doc["response"] = transcript.response;
    doc["timestamp"] = transcript.timestamp;

    // unique temp file per writer, atomic rename: readers never see partials
    std::ostringstream tmp_name;
    tmp_name << transcript.key << ".tmp." << std::this_thread::get_id() << "."
             << std::chrono::steady_clock::now().time_since_epoch().count();
    std::filesystem::path tmp = target.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw DataError("cannot write transcript: " + tmp.string());
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

ChatMode chat_mode_from_string(const std::string& tag) {
    if (tag == "live") return ChatMode::live;
    if (tag == "replay") return ChatMode::replay;
    if (tag == "record") return ChatMode::record;
    throw UsageError("unknown chat mode '" + tag + "' (expected live|replay|record)");
}

EndpointConfig EndpointConfig::from_environment() {
    EndpointConfig cfg;
    if (const char* v = std::getenv("LLM_BASE_URL")) cfg.base_url = v;
    if (const char* v = std::getenv("LLM_API_KEY")) cfg.api_key = v;
    if (const char* v = std::getenv("LLM_MODEL")) cfg.model = v;
    return cfg;
}

struct ChatClient::Limiter {
    explicit Limiter(int slots) : sem(slots) {}
    std::counting_semaphore<4096> sem;
};

ChatClient::ChatClient(EndpointConfig config, TranscriptCache cache, Transport transport)
    : config_(std::move(config)), cache_(std::move(cache)), transport_(std::move(transport)) {
    if (!transport_) transport_ = http_chat_transport();
    int slots = std::clamp(config_.max_in_flight, 1, 4096);
    limiter_ = std::make_shared<Limiter>(slots);
}

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string ChatClient::call_with_retries(const ChatRequest& request) {
    limiter_->sem.acquire();
    struct Release {
        Limiter* l;
        ~Release() { l->sem.release(); }
    } release{limiter_.get()};

    int delay_ms = config_.backoff_initial_ms;
    for (int attempt = 0;; ++attempt) {
        try {
            return transport_(config_, request);
        } catch (const EndpointError& e) {
            if (!e.retryable || attempt >= config_.max_retries) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms = std::min(delay_ms * 2, 60'000);
        }
    }
}

std::string ChatClient::complete(const ChatRequest& request, ChatMode mode) {
    const std::string key = replay_key(request);
    switch (mode) {
        case ChatMode::replay: {
            auto cached = cache_.load(key);
            if (!cached)
                throw DataError("missing transcript for replay key " + key + " under " +
                                cache_.root().string());
            return cached->response;
        }
        case ChatMode::record: {
            if (auto cached = cache_.load(key)) return cached->response;
            ChatTranscript t;
            t.request = request;
            t.response = call_with_retries(request);
            t.timestamp = utc_timestamp();
            t.key = key;
            cache_.store(t);
            return t.response;
        }
        case ChatMode::live:
            return call_with_retries(request);
    }
    throw UsageError("invalid chat mode");
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

namespace {

// "12." / "12)" / "-" / "*" / "•" markers; returns the remainder or
// nullopt when the line carries no marker.
std::optional<std::string> strip_list_marker(const std::string& line) {
    size_t i = 0;
    const size_t n = line.size();
    if (i < n && std::isdigit(static_cast<unsigned char>(line[i]))) {
        size_t d = i;
        while (d < n && d < i + 4 && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
        if (d < n && (line[d] == '.' || line[d] == ')')) return line.substr(d + 1);
        return std::nullopt;
    }
    if (i < n && (line[i] == '-' || line[i] == '*')) {
        if (i + 1 < n && std::isspace(static_cast<unsigned char>(line[i + 1])))
            return line.substr(i + 2);
        return std::nullopt;
    }
    if (n >= 3 && line.compare(0, 3, "\xE2\x80\xA2") == 0) return line.substr(3);
    return std::nullopt;
}

bool strip_wrapper(std::string& s, const std::string& open, const std::string& close) {
    if (s.size() >= open.size() + close.size() && s.compare(0, open.size(), open) == 0 &&
        s.compare(s.size() - close.size(), close.size(), close) == 0) {
        s = s.substr(open.size(), s.size() - open.size() - close.size());
        return true;
    }
    return false;
}

std::string clean_item_text(std::string s) {
    s = trim(s);
    bool changed = true;
    while (changed && !s.empty()) {
        changed = false;
        changed |= strip_wrapper(s, "**", "**");
        changed |= strip_wrapper(s, "*", "*");
        changed |= strip_wrapper(s, "_", "_");
        changed |= strip_wrapper(s, "`", "`");
        changed |= strip_wrapper(s, "\"", "\"");
        changed |= strip_wrapper(s, "'", "'");
        changed |= strip_wrapper(s, "\xE2\x80\x9C", "\xE2\x80\x9D");  // curly quotes
        if (changed) s = trim(s);
    }
    return s;
}

}  // namespace

RawRecommendationList parse_recommendation_lines(const std::string& response) {
    RawRecommendationList out;
    std::istringstream in(response);
    std::string line;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto rest = strip_list_marker(trimmed);
        if (!rest) continue;
        std::string item = clean_item_text(*rest);
        if (item.empty()) continue;
        int& count = seen[item];
        if (count > 0) ++out.duplicate_count;
        ++count;
        out.items.push_back(std::move(item));
    }
    out.malformed = out.items.empty();
    return out;
}

}  // namespace receval
