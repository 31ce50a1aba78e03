#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace kgdial {

enum class Role { question, answer };

/// One walk edge as the generators see it: labels in KG orientation plus
/// similar-entity expansions.
struct PathEdge {
    std::string head;
    std::string relation;
    std::string tail;
    std::vector<std::string> related;
};

struct GenerationRequest {
    std::string instruction;
    std::string history;        // serialized "Q{t}: ..." / "A{t}: ..." lines
    std::string path_or_entity; // serialized path lines
    Role role = Role::question;
    std::vector<PathEdge> path; // structured form of path_or_entity
};

/// Text generator behind both dialogue agents. Implementations must be
/// safe to call from several threads.
class Provider {
public:
    virtual ~Provider() = default;
    /// Raw completion text. Throws ProviderError on transport failure.
    virtual std::string complete(const GenerationRequest& request) = 0;
    virtual std::string name() const = 0;
};

enum class ProviderKind { mock, http_llm };

struct ProviderConfig {
    ProviderKind provider = ProviderKind::mock;
    std::string endpoint;      // e.g. http://host:port/v1/chat/completions
    std::string model_name;
    /// Optional second endpoint/model for the answer agent.
    std::string answer_endpoint;
    std::string answer_model_name;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    double rate_limit = 0.0;   // requests per second across workers; 0 = unlimited
    std::size_t length_limit = 30;
    std::string api_key_env = "KGDIAL_API_KEY";
    std::uint64_t seed = 42;

    void validate() const;
};

/// Deterministic template filler standing in for an LLM.
///   question: "What is the {relation} of {head}?"
///   answer:   "{tail} is the {relation} of {head}." plus " Related: a, b."
///             when the path carries expansions.
/// Longer outputs fall back to shorter forms that keep every entity label.
std::string mock_generate(const GenerationRequest& request, std::uint64_t seed, std::size_t length_limit = 30);

class MockProvider final : public Provider {
public:
    MockProvider(std::uint64_t seed, std::size_t length_limit) : seed_(seed), length_limit_(length_limit) {}
    std::string complete(const GenerationRequest& request) override;
    std::string name() const override { return "mock"; }

private:
    std::uint64_t seed_;
    std::size_t length_limit_;
};

/// Spaces request start times at least 1/rate apart across all callers.
class RateLimiter {
public:
    explicit RateLimiter(double per_second);
    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_{};
    std::chrono::steady_clock::time_point next_{};
};

/// OpenAI-style chat-completions client. The role travels as the system
/// message; the rendered prompt as the user message.
class HttpLlmProvider final : public Provider {
public:
    HttpLlmProvider(std::string endpoint, std::string model, const ProviderConfig& cfg,
                    std::shared_ptr<RateLimiter> limiter);
    std::string complete(const GenerationRequest& request) override;
    std::string name() const override { return "http_llm:" + model_; }

    /// Wire body for one request; exposed for adapter tests.
    std::string request_body(const GenerationRequest& request) const;
    /// Extracts choices[0].message.content. Throws GenerationError.
    static std::string parse_response(const std::string& body);

private:
    std::string scheme_host_port_;
    std::string path_;
    std::string model_;
    ProviderConfig cfg_;
    std::string api_key_;
    std::shared_ptr<RateLimiter> limiter_;
};

/// The two agents. With no answer-specific endpoint both point to one
/// provider instance.
struct Agents {
    std::shared_ptr<Provider> question;
    std::shared_ptr<Provider> answer;
};

Agents make_agents(const ProviderConfig& cfg);

std::string_view role_instruction(Role role);

} // namespace kgdial
