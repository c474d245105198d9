/*
 * Copyright 2026 The Forge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "forge/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "forge/checksum.hpp"
#include "httplib.h"
#include "json.hpp"

namespace forge {
namespace {

using json = nlohmann::json;

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("llm endpoint must be an absolute URL");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

LlmClientSpec http_spec_from_env() {
  const char* endpoint = std::getenv("FORGE_LLM_ENDPOINT");
  if (!endpoint || !*endpoint) throw InvalidArgument("FORGE_LLM_ENDPOINT is not set; use the stub client or export it");
  LlmClientSpec spec;
  spec.kind = LlmClientSpec::Kind::kHttp;
  spec.endpoint = endpoint;
  if (const char* model = std::getenv("FORGE_LLM_MODEL"); model && *model) spec.model = model;
  return spec;
}

std::string StubClient::complete(const std::string& prompt) {
  const auto h = sha256_hex(prompt);
  return "[stub " + h.substr(0, 12) +
         "] Deterministic placeholder narrative. The scenario summary above is the modeled evidence for this "
         "question; no remote model was called.";
}

HttpChatClient::HttpChatClient(LlmClientSpec spec) : spec_(std::move(spec)) {
  if (spec_.max_in_flight < 1) throw InvalidArgument("llm client: max_in_flight must be at least 1");
  split_url(spec_.endpoint);
}

std::string HttpChatClient::complete(const std::string& prompt) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < spec_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    HttpChatClient* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const auto url = split_url(spec_.endpoint);
  httplib::Client cli(url.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(spec_.timeout_s));
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  httplib::Headers headers;
  if (const char* key = std::getenv(spec_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const json body = {{"model", spec_.model},
                     {"temperature", 0},
                     {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  const auto payload = body.dump();

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << std::min(attempt, 5)));
    auto res = cli.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      if (retryable(res->status)) continue;
      break;
    }
    try {
      const auto doc = json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
      break;
    }
  }
  throw LlmTransportError("llm request failed: " + last_error, prompt);
}

std::unique_ptr<LlmClient> make_client(const LlmClientSpec& spec) {
  if (spec.kind == LlmClientSpec::Kind::kStub) return std::make_unique<StubClient>();
  return std::make_unique<HttpChatClient>(spec);
}

}  // namespace forge
