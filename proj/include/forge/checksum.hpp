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

#ifndef FORGE_CHECKSUM_HPP_
#define FORGE_CHECKSUM_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace forge {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const double> values);
std::string sha256_file(const std::filesystem::path& path);

// Relative path -> digest for every regular file below `root`, one
// "digest  relpath" line per file in lexicographic path order.
std::string tree_checksums(const std::filesystem::path& root);

}  // namespace forge

#endif  // FORGE_CHECKSUM_HPP_
