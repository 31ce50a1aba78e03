#include "kgdial/provider.hpp"

#include "kgdial/dialogue.hpp"
#include "kgdial/error.hpp"
#include "kgdial/tokenize.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace kgdial {

void ProviderConfig::validate() const {
    if (timeout.count() <= 0)
        throw ConfigError("provider.timeout_ms must be > 0");
    if (max_retries < 0)
        throw ConfigError("provider.max_retries must be >= 0");
    if (rate_limit < 0)
        throw ConfigError("provider.rate_limit must be >= 0");
    if (length_limit == 0)
        throw ConfigError("provider.length_limit must be > 0");
    if (provider == ProviderKind::http_llm && endpoint.empty())
        throw ConfigError("provider.endpoint is required for http_llm");
}

std::string_view role_instruction(Role role) {
    return role == Role::question ? "You are the Question Generator of a knowledge-grounded dialogue."
                                  : "You are the Answer Generator of a knowledge-grounded dialogue.";
}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += sep;
        out += items[i];
    }
    return out;
}

std::string first_fitting(const std::vector<std::string>& forms, std::size_t limit) {
    for (const auto& form : forms)
        if (grapheme_count(form) <= limit)
            return form;
    return forms.back();
}

} // namespace

std::string mock_generate(const GenerationRequest& request, std::uint64_t /*seed: templates are fixed*/,
                          std::size_t length_limit) {
    if (request.path.empty())
        return {};
    const PathEdge& edge = request.path.back();
    const std::string& h = edge.head;
    const std::string& r = edge.relation;
    const std::string& t = edge.tail;

    if (request.role == Role::question) {
        return first_fitting({"What is the " + r + " of " + h + "?", r + " of " + h + "?", h + "?", h},
                             length_limit);
    }
    std::vector<std::string> forms;
    const std::string related = join(edge.related, ", ");
    if (edge.related.empty()) {
        forms = {t + " is the " + r + " of " + h + ".", t + ": " + r + " of " + h + ".", t + ".", t};
    } else {
        forms = {t + " is the " + r + " of " + h + ". Related: " + related + ".",
                 t + ": " + r + " of " + h + "; " + related + ".", t + "; " + related + ".", t + ".", t};
    }
    return first_fitting(forms, length_limit);
}

std::string MockProvider::complete(const GenerationRequest& request) {
    return mock_generate(request, seed_, length_limit_);
}

RateLimiter::RateLimiter(double per_second) {
    if (per_second > 0)
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / per_second));
}

void RateLimiter::acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero())
        return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        slot = std::max(std::chrono::steady_clock::now(), next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

HttpLlmProvider::HttpLlmProvider(std::string endpoint, std::string model, const ProviderConfig& cfg,
                                 std::shared_ptr<RateLimiter> limiter)
    : model_(std::move(model)), cfg_(cfg), limiter_(std::move(limiter)) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("provider endpoint must start with http:// or https://: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
    if (const char* key = std::getenv(cfg.api_key_env.c_str()))
        api_key_ = key;
}

std::string HttpLlmProvider::request_body(const GenerationRequest& request) const {
    nlohmann::json body{{"model", model_},
                        {"messages",
                         {{{"role", "system"}, {"content", std::string(role_instruction(request.role))}},
                          {{"role", "user"}, {"content", render_prompt(request)}}}}};
    return body.dump();
}

std::string HttpLlmProvider::parse_response(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw GenerationError("provider returned invalid JSON");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw GenerationError("provider response lacks choices[0].message.content");
    }
}

std::string HttpLlmProvider::complete(const GenerationRequest& request) {
    httplib::Client client(scheme_host_port_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);
    const std::string body = request_body(request);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << std::min(attempt - 1, 5)));
        if (limiter_)
            limiter_->acquire();
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProviderError("provider rejected request: HTTP " + std::to_string(res->status) + " " + res->body);
        std::string text = parse_response(res->body);
        if (grapheme_count(trim(text)) > cfg_.length_limit)
            spdlog::warn("provider output exceeds {} characters: {}", cfg_.length_limit, text);
        return text;
    }
    throw ProviderError("provider " + scheme_host_port_ + path_ + " failed after " +
                        std::to_string(cfg_.max_retries + 1) + " attempt(s): " + last_error);
}

Agents make_agents(const ProviderConfig& cfg) {
    cfg.validate();
    if (cfg.provider == ProviderKind::mock) {
        auto mock = std::make_shared<MockProvider>(cfg.seed, cfg.length_limit);
        return {mock, mock};
    }
    auto limiter = std::make_shared<RateLimiter>(cfg.rate_limit);
    auto question = std::make_shared<HttpLlmProvider>(cfg.endpoint, cfg.model_name, cfg, limiter);
    if (cfg.answer_endpoint.empty() && cfg.answer_model_name.empty())
        return {question, question};
    auto answer = std::make_shared<HttpLlmProvider>(
        cfg.answer_endpoint.empty() ? cfg.endpoint : cfg.answer_endpoint,
        cfg.answer_model_name.empty() ? cfg.model_name : cfg.answer_model_name, cfg, limiter);
    return {question, answer};
}

} // namespace kgdial
