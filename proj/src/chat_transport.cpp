// HTTP transport for the chat-completion wire protocol (OpenAI-compatible
// POST {base}/chat/completions). Kept in its own TU: httplib is heavy and
// only this file needs TLS.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <json.hpp>

#include "receval/llm_bridge.hpp"

namespace receval {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // possibly empty prefix, no trailing slash
};

ParsedUrl parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw EndpointError("endpoint base URL must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.path = base_url.substr(path_start);
        while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    }
    return out;
}

}  // namespace

Transport http_chat_transport() {
    return [](const EndpointConfig& config, const ChatRequest& request) -> std::string {
        if (config.base_url.empty())
            throw EndpointError("no endpoint configured (set LLM_BASE_URL)");
        ParsedUrl url = parse_base_url(config.base_url);

        httplib::Client client(url.origin);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!config.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config.api_key);

        json body;
        body["model"] = request.model;
        body["temperature"] = request.temperature;
        body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});

        auto res = client.Post(url.path + "/chat/completions", headers, body.dump(),
                               "application/json");
        if (!res)
            throw EndpointError("transport failure: " + httplib::to_string(res.error()), true);
        if (res->status == 429 || res->status >= 500)
            throw EndpointError("endpoint returned status " + std::to_string(res->status), true);
        if (res->status != 200)
            throw EndpointError("endpoint returned status " + std::to_string(res->status) + ": " +
                                res->body);
        try {
            json doc = json::parse(res->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw EndpointError(std::string("malformed endpoint response: ") + e.what());
        }
    };
}

}  // namespace receval
