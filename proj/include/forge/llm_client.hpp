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

#ifndef FORGE_LLM_CLIENT_HPP_
#define FORGE_LLM_CLIENT_HPP_

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>

#include "forge/error.hpp"

namespace forge {

struct LlmClientSpec {
  enum class Kind { kStub, kHttp };
  Kind kind = Kind::kStub;
  std::string endpoint;  // full URL of a chat-completion route
  std::string model = "gpt-4o-mini";
  // Name of the environment variable holding the bearer token. The token
  // itself is read at call time and never stored in configs or artifacts.
  std::string api_key_env = "FORGE_LLM_API_KEY";
  double timeout_s = 60.0;
  int max_retries = 3;
  int max_in_flight = 4;
};

// Remote spec from FORGE_LLM_ENDPOINT; throws InvalidArgument when unset.
LlmClientSpec http_spec_from_env();

class LlmTransportError : public Error {
 public:
  LlmTransportError(const std::string& message, std::string prompt)
      : Error("llm_transport", message), prompt_(std::move(prompt)) {}

  const std::string& prompt() const noexcept { return prompt_; }

 private:
  std::string prompt_;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  // Stable identifier recorded in provenance, e.g. "stub" or "http:model".
  virtual std::string id() const = 0;
};

// Deterministic stand-in: the reply is a pure function of the prompt hash.
class StubClient : public LlmClient {
 public:
  std::string complete(const std::string& prompt) override;
  std::string id() const override { return "stub"; }
};

class HttpChatClient : public LlmClient {
 public:
  explicit HttpChatClient(LlmClientSpec spec);
  std::string complete(const std::string& prompt) override;
  std::string id() const override { return "http:" + spec_.model; }

 private:
  LlmClientSpec spec_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

std::unique_ptr<LlmClient> make_client(const LlmClientSpec& spec);

}  // namespace forge

#endif  // FORGE_LLM_CLIENT_HPP_
