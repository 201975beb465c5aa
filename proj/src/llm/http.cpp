#include <cmath>
#include <cstdlib>
#include <thread>

#include <curl/curl.h>
#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/llm/gateway.hpp"

namespace heurgen::llm {

using nlohmann::json;

namespace {

std::size_t collect(char* data, std::size_t size, std::size_t n, void* user) {
  static_cast<std::string*>(user)->append(data, size * n);
  return size * n;
}

struct CurlGlobal {
  CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
  ~CurlGlobal() { curl_global_cleanup(); }
};

struct Attempt {
  long status = 0;
  std::string body;
  std::string transport_error;
};

Attempt post(const std::string& url, const std::string& payload, const std::string& api_key, double timeout_s) {
  static CurlGlobal global;
  Attempt a;
  CURL* curl = curl_easy_init();
  if (!curl) {
    a.transport_error = "curl_easy_init failed";
    return a;
  }
  curl_slist* headers = nullptr;
  headers = curl_slist_append(headers, "Content-Type: application/json");
  std::string auth;
  if (!api_key.empty()) {
    auth = "Authorization: Bearer " + api_key;
    headers = curl_slist_append(headers, auth.c_str());
  }
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_HTTPHEADER, headers);
  curl_easy_setopt(curl, CURLOPT_POSTFIELDS, payload.c_str());
  curl_easy_setopt(curl, CURLOPT_POSTFIELDSIZE, static_cast<long>(payload.size()));
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, collect);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &a.body);
  curl_easy_setopt(curl, CURLOPT_TIMEOUT_MS, static_cast<long>(timeout_s * 1000));
  curl_easy_setopt(curl, CURLOPT_NOSIGNAL, 1L);
  CURLcode rc = curl_easy_perform(curl);
  if (rc != CURLE_OK) {
    a.transport_error = curl_easy_strerror(rc);
  } else {
    curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &a.status);
  }
  curl_slist_free_all(headers);
  curl_easy_cleanup(curl);
  return a;
}

}  // namespace

HttpProvider::HttpProvider(HttpConfig config) : config_(std::move(config)) {
  if (config_.max_attempts < 1) throw Error(ErrorCode::kConfigInvalid, "max_attempts must be at least 1");
}

ChatResponse HttpProvider::complete(const ChatRequest& request, double temperature) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  const std::string payload =
      json{{"model", config_.model}, {"messages", messages}, {"temperature", temperature}}.dump();
  std::string api_key;
  if (const char* k = std::getenv(config_.api_key_env.c_str())) api_key = k;

  Attempt last;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(config_.backoff_initial_s * std::pow(2.0, attempt - 1)));
    }
    last = post(url, payload, api_key, config_.request_timeout_s);
    if (last.transport_error.empty() && last.status == 200) break;
  }
  if (!last.transport_error.empty() || last.status != 200) {
    throw Error(ErrorCode::kHttpError,
                fmt::format("POST {} failed after {} attempts: status {}{}", url, config_.max_attempts, last.status,
                            last.transport_error.empty() ? "" : " (" + last.transport_error + ")"));
  }
  auto doc = json::parse(last.body, nullptr, false);
  try {
    if (doc.is_discarded()) throw std::runtime_error("body is not JSON");
    ChatResponse r;
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    r.text = content.is_null() ? std::string() : content.get<std::string>();
    r.prompt_tokens = -1;
    r.completion_tokens = -1;
    if (doc.contains("usage") && doc["usage"].is_object()) {
      const auto& u = doc["usage"];
      if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_integer())
        r.prompt_tokens = std::max<std::int64_t>(0, u["prompt_tokens"].get<std::int64_t>());
      if (u.contains("completion_tokens") && u["completion_tokens"].is_number_integer())
        r.completion_tokens = std::max<std::int64_t>(0, u["completion_tokens"].get<std::int64_t>());
    }
    return r;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMalformedProviderResponse, e.what());
  }
}

}  // namespace heurgen::llm
