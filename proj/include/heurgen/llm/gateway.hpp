#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace heurgen::llm {

enum class Tag { kGeneration, kFixing, kCalibrationRanges, kAmNaming };

std::string_view to_string(Tag tag);
Tag tag_from_string(std::string_view name);

struct ChatRequest {
  std::string system;
  std::string user;
  Tag tag = Tag::kGeneration;
  std::optional<double> temperature;  // unset: gateway default for the tag
};

struct ChatResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool usage_estimated = false;

  std::int64_t total_tokens() const { return prompt_tokens + completion_tokens; }
};

/// ceil(chars / 4), the fallback when a provider omits usage.
std::int64_t estimate_tokens(std::string_view text);

class Provider {
 public:
  virtual ~Provider() = default;
  /// Usage fields may be left negative to request estimation by the gateway.
  virtual ChatResponse complete(const ChatRequest& request, double temperature) = 0;
  /// Opaque resumable state (mock cursor); null for stateless providers.
  virtual nlohmann::json state() const { return nullptr; }
  virtual void restore(const nlohmann::json& /*state*/) {}
};

struct HttpConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "gpt-4o-mini";
  int max_attempts = 3;
  double backoff_initial_s = 1.0;
  double request_timeout_s = 300.0;
};

/// OpenAI-compatible chat-completions client on libcurl.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpConfig config);
  ChatResponse complete(const ChatRequest& request, double temperature) override;

 private:
  HttpConfig config_;
};

struct ScriptedReply {
  std::optional<std::string> tag;
  std::string text;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
};

/// Replays a scripted transcript in order.
class MockProvider : public Provider {
 public:
  explicit MockProvider(std::vector<ScriptedReply> replies);
  static MockProvider from_jsonl(const std::filesystem::path& path);

  ChatResponse complete(const ChatRequest& request, double temperature) override;
  nlohmann::json state() const override;
  void restore(const nlohmann::json& state) override;

  std::size_t cursor() const { return cursor_; }
  std::size_t size() const { return replies_.size(); }

 private:
  std::vector<ScriptedReply> replies_;
  std::size_t cursor_ = 0;
};

enum class BudgetMode { kTokens, kTimeSeconds };

std::string_view to_string(BudgetMode mode);
BudgetMode budget_mode_from_string(std::string_view name);

/// Run-wide resource ceiling. Token mode is charged by the gateway; time mode
/// reads a clock (seconds) plus the offset carried over from a resumed run.
class RunBudget {
 public:
  using Clock = std::function<double()>;

  RunBudget(BudgetMode mode, std::int64_t limit, Clock clock = {});

  BudgetMode mode() const { return mode_; }
  std::int64_t limit() const { return limit_; }
  std::int64_t consumed() const;
  double consumed_exact() const;
  bool exhausted() const { return consumed_exact() >= static_cast<double>(limit_); }

  void charge_tokens(std::int64_t tokens);
  /// Restores the consumed amount from a checkpoint.
  void restore(double consumed);

 private:
  BudgetMode mode_;
  std::int64_t limit_;
  Clock clock_;
  double start_ = 0.0;
  double offset_ = 0.0;
  mutable double high_water_ = 0.0;
  std::int64_t tokens_ = 0;
};

struct GatewayConfig {
  double fixing_temperature = 0.7;
  double default_temperature = 1.0;
};

/// Serializes calls, enforces the budget and appends the transcript log.
class Gateway {
 public:
  Gateway(std::unique_ptr<Provider> provider, GatewayConfig config = {},
          std::optional<std::filesystem::path> transcript_path = std::nullopt);

  ChatResponse complete(const ChatRequest& request, RunBudget& budget);

  double temperature_for(const ChatRequest& request) const;
  Provider& provider() { return *provider_; }
  std::int64_t calls() const { return calls_; }
  /// Tokens charged through this gateway, whatever the budget mode.
  std::int64_t tokens() const { return tokens_; }
  void restore_counters(std::int64_t calls, std::int64_t tokens) {
    calls_ = calls;
    tokens_ = tokens;
  }

 private:
  std::unique_ptr<Provider> provider_;
  GatewayConfig config_;
  std::optional<std::ofstream> transcript_;
  std::mutex mutex_;
  std::int64_t calls_ = 0;
  std::int64_t tokens_ = 0;
};

struct CodeBlock {
  std::string code;
  bool fenced = true;
};

/// First fenced block, else the whole stripped text flagged unfenced.
CodeBlock extract_code_block(std::string_view text);

}  // namespace heurgen::llm
