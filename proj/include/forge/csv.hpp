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

#ifndef FORGE_CSV_HPP_
#define FORGE_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace forge::csv {

// Plain comma-separated table. Fields never contain commas or quotes in any
// file this project writes (identifiers and numbers only), so no quoting.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by header name; throws IoError if absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Table& table);

// Shortest decimal text that parses back to the same double.
std::string format(double value);
double parse_double(std::string_view text);
int parse_int(std::string_view text);

}  // namespace forge::csv

#endif  // FORGE_CSV_HPP_
