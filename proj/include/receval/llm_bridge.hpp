#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "receval/common.hpp"

namespace receval {

enum class PromptKind { zero_shot, few_shot, chain_of_thought, role_playing };

PromptKind prompt_kind_from_string(const std::string& tag);
std::string to_string(PromptKind kind);

struct PromptTemplate {
    PromptKind kind = PromptKind::role_playing;
    int list_length = 50;
    // Joined history longer than this many characters is truncated
    // oldest-first. 0 disables truncation.
    std::size_t history_char_budget = 0;
};

struct RenderedPrompt {
    std::string text;
    bool truncated = false;
    std::size_t dropped_items = 0;
};

/// Fills the template with the comma-joined history. Throws DataError on an
/// empty history.
RenderedPrompt render_prompt(const PromptTemplate& tmpl, const std::vector<std::string>& history);

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

struct ChatRequest {
    std::string model;
    double temperature = 0.0;
    std::string prompt;  // single user message
};

/// SHA-256 over the canonical (model, params, prompt) serialization.
std::string replay_key(const ChatRequest& request);

std::string sha256_hex(const std::string& data);

struct ChatTranscript {
    ChatRequest request;
    std::string response;
    std::string timestamp;  // ISO-8601 UTC, recorded once
    std::string key;
};

/// Content-addressed transcript store: one JSON file per replay key,
/// published atomically (temp file + rename), so concurrent readers never
/// observe a partial entry.
class TranscriptCache {
public:
    explicit TranscriptCache(std::filesystem::path root);

    std::optional<ChatTranscript> load(const std::string& key) const;
    void store(const ChatTranscript& transcript) const;
    std::filesystem::path path_for(const std::string& key) const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Chat completion client
// ---------------------------------------------------------------------------

enum class ChatMode { live, replay, record };

ChatMode chat_mode_from_string(const std::string& tag);

struct EndpointConfig {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string api_key;
    std::string model;
    int max_in_flight = 4;
    int max_retries = 5;
    int backoff_initial_ms = 500;

    /// Reads LLM_BASE_URL, LLM_API_KEY, LLM_MODEL from the environment.
    static EndpointConfig from_environment();
};

/// Sends one request and returns the assistant text. Throws EndpointError;
/// retryable failures carry retryable = true.
using Transport = std::function<std::string(const EndpointConfig&, const ChatRequest&)>;

Transport http_chat_transport();

class ChatClient {
public:
    ChatClient(EndpointConfig config, TranscriptCache cache, Transport transport = {});

    /// live: call the endpoint. record: call, persist, return (reuses an
    /// existing cache entry). replay: cached response only, byte-identical.
    std::string complete(const ChatRequest& request, ChatMode mode);

private:
    std::string call_with_retries(const ChatRequest& request);

    EndpointConfig config_;
    TranscriptCache cache_;
    Transport transport_;
    // bounded in-flight requests; see complete()
    struct Limiter;
    std::shared_ptr<Limiter> limiter_;
};

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

struct RawRecommendationList {
    std::string user_id;
    std::vector<std::string> items;  // cleaned strings, duplicates retained
    std::string transcript_key;
    bool malformed = false;          // no list structure found
    int duplicate_count = 0;         // repeated raw strings (defect, reported)
};

/// Total on arbitrary text: extracts enumerated/bulleted lines, strips
/// markers, markdown emphasis and surrounding quotes, preserves order.
/// Responses with no list structure come back empty with malformed = true.
RawRecommendationList parse_recommendation_lines(const std::string& response);

}  // namespace receval
