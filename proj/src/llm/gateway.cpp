#include "heurgen/llm/gateway.hpp"

#include <cmath>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"

namespace heurgen::llm {

using nlohmann::json;

std::string_view to_string(Tag tag) {
  switch (tag) {
    case Tag::kGeneration: return "generation";
    case Tag::kFixing: return "fixing";
    case Tag::kCalibrationRanges: return "calibration_ranges";
    case Tag::kAmNaming: return "am_naming";
  }
  return "generation";
}

Tag tag_from_string(std::string_view name) {
  for (Tag t : {Tag::kGeneration, Tag::kFixing, Tag::kCalibrationRanges, Tag::kAmNaming}) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown request tag '{}'", name));
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::string_view to_string(BudgetMode mode) {
  return mode == BudgetMode::kTokens ? "tokens" : "time_seconds";
}

BudgetMode budget_mode_from_string(std::string_view name) {
  if (name == "tokens") return BudgetMode::kTokens;
  if (name == "time_seconds" || name == "time") return BudgetMode::kTimeSeconds;
  throw Error(ErrorCode::kConfigInvalid, fmt::format("unknown budget mode '{}'", name));
}

namespace {

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

RunBudget::RunBudget(BudgetMode mode, std::int64_t limit, Clock clock)
    : mode_(mode), limit_(limit), clock_(clock ? std::move(clock) : Clock(steady_seconds)) {
  if (limit < 0) throw Error(ErrorCode::kInvalidArgument, "budget limit must be non-negative");
  start_ = clock_();
}

double RunBudget::consumed_exact() const {
  double value = mode_ == BudgetMode::kTokens ? static_cast<double>(tokens_) : offset_ + (clock_() - start_);
  high_water_ = std::max(high_water_, value);
  return high_water_;
}

std::int64_t RunBudget::consumed() const {
  return static_cast<std::int64_t>(std::floor(consumed_exact()));
}

void RunBudget::charge_tokens(std::int64_t tokens) {
  if (tokens < 0) throw Error(ErrorCode::kInvalidArgument, "negative token charge");
  if (mode_ == BudgetMode::kTokens) tokens_ += tokens;
}

void RunBudget::restore(double consumed) {
  if (mode_ == BudgetMode::kTokens) {
    tokens_ = static_cast<std::int64_t>(consumed);
  } else {
    offset_ = consumed;
    start_ = clock_();
  }
  high_water_ = consumed;
}

Gateway::Gateway(std::unique_ptr<Provider> provider, GatewayConfig config,
                 std::optional<std::filesystem::path> transcript_path)
    : provider_(std::move(provider)), config_(config) {
  if (!provider_) throw Error(ErrorCode::kInvalidArgument, "gateway needs a provider");
  if (transcript_path) {
    transcript_.emplace(*transcript_path, std::ios::app | std::ios::binary);
    if (!*transcript_) throw Error(ErrorCode::kIoError, fmt::format("cannot open {}", transcript_path->string()));
  }
}

double Gateway::temperature_for(const ChatRequest& request) const {
  if (request.temperature) return *request.temperature;
  return request.tag == Tag::kFixing ? config_.fixing_temperature : config_.default_temperature;
}

ChatResponse Gateway::complete(const ChatRequest& request, RunBudget& budget) {
  std::lock_guard lock(mutex_);
  if (budget.exhausted()) {
    throw Error(ErrorCode::kBudgetExhausted,
                fmt::format("{} budget spent ({} of {})", to_string(budget.mode()), budget.consumed(), budget.limit()));
  }
  const double temperature = temperature_for(request);
  const auto start = std::chrono::steady_clock::now();
  ChatResponse response = provider_->complete(request, temperature);
  const auto elapsed_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (response.prompt_tokens < 0) {
    response.prompt_tokens = estimate_tokens(request.system) + estimate_tokens(request.user);
    response.usage_estimated = true;
  }
  if (response.completion_tokens < 0) {
    response.completion_tokens = estimate_tokens(response.text);
    response.usage_estimated = true;
  }
  budget.charge_tokens(response.total_tokens());
  ++calls_;
  tokens_ += response.total_tokens();
  if (transcript_) {
    json line = {{"tag", to_string(request.tag)},
                 {"request", {{"system", request.system}, {"user", request.user}, {"temperature", temperature}}},
                 {"response", response.text},
                 {"usage",
                  {{"prompt_tokens", response.prompt_tokens},
                   {"completion_tokens", response.completion_tokens},
                   {"estimated", response.usage_estimated}}},
                 {"elapsed_ms", elapsed_ms}};
    *transcript_ << line.dump() << '\n';
    transcript_->flush();
  }
  return response;
}

MockProvider::MockProvider(std::vector<ScriptedReply> replies) : replies_(std::move(replies)) {
  if (replies_.empty()) throw Error(ErrorCode::kInvalidArgument, "mock transcript is empty");
}

MockProvider MockProvider::from_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read transcript {}", path.string()));
  std::vector<ScriptedReply> replies;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::is_blank(line)) continue;
    auto doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
      throw Error(ErrorCode::kMalformedProviderResponse,
                  fmt::format("{}:{}: expected an object with a string 'text'", path.string(), lineno));
    }
    ScriptedReply r;
    r.text = doc["text"].get<std::string>();
    if (doc.contains("tag") && doc["tag"].is_string()) r.tag = doc["tag"].get<std::string>();
    if (doc.contains("prompt_tokens") && doc["prompt_tokens"].is_number_integer())
      r.prompt_tokens = doc["prompt_tokens"].get<std::int64_t>();
    if (doc.contains("completion_tokens") && doc["completion_tokens"].is_number_integer())
      r.completion_tokens = doc["completion_tokens"].get<std::int64_t>();
    replies.push_back(std::move(r));
  }
  return MockProvider(std::move(replies));
}

ChatResponse MockProvider::complete(const ChatRequest& request, double /*temperature*/) {
  if (cursor_ >= replies_.size()) {
    throw Error(ErrorCode::kTranscriptExhausted, fmt::format("all {} scripted replies consumed", replies_.size()));
  }
  const auto& reply = replies_[cursor_];
  if (reply.tag && *reply.tag != to_string(request.tag)) {
    throw Error(ErrorCode::kTranscriptMismatch, fmt::format("reply {} is scripted for '{}' but the request is '{}'",
                                                            cursor_, *reply.tag, to_string(request.tag)));
  }
  ++cursor_;
  ChatResponse r;
  r.text = reply.text;
  r.prompt_tokens = reply.prompt_tokens.value_or(-1);
  r.completion_tokens = reply.completion_tokens.value_or(-1);
  return r;
}

json MockProvider::state() const { return {{"cursor", cursor_}}; }

void MockProvider::restore(const json& state) {
  auto c = state.at("cursor").get<std::size_t>();
  if (c > replies_.size()) throw Error(ErrorCode::kInvalidArgument, "mock cursor beyond transcript end");
  cursor_ = c;
}

CodeBlock extract_code_block(std::string_view raw) {
  if (text::trim(raw).empty()) throw Error(ErrorCode::kEmptyCompletion, "completion is empty");
  if (auto block = text::first_fenced_block(raw)) {
    if (text::trim(*block).empty()) throw Error(ErrorCode::kEmptyCompletion, "fenced block is empty");
    return {*block, true};
  }
  return {std::string(text::trim(raw)), false};
}

}  // namespace heurgen::llm
