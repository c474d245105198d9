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

#ifndef FORGE_ERROR_HPP_
#define FORGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace forge {

// Every failure carries a short machine-readable code ("dimension_mismatch",
// "infeasible", ...) next to the human message. The CLI prints both on one
// line; the service maps them into the error envelope.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& tensor, const std::string& detail)
      : Error("dimension_mismatch", tensor + ": " + detail), tensor_(tensor) {}

  const std::string& tensor() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace forge

#endif  // FORGE_ERROR_HPP_
