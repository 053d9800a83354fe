/*
 * Copyright 2026 The enzkg Authors.
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

#ifndef ENZKG_CONFIG_HPP_
#define ENZKG_CONFIG_HPP_

#include <filesystem>
#include <istream>
#include <map>
#include <string>

#include "enzkg/model.hpp"

namespace enzkg {

// Flat "key = value" text; '#' starts a comment. Later keys override earlier
// ones.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in);
ConfigMap read_config_file(const std::filesystem::path& path);

// Sets the TrainConfig fields named in map. Throws ConfigError on unknown
// keys or malformed values.
void apply_config(const ConfigMap& map, TrainConfig& config);

// Every field, one per line, in a form apply_config reads back exactly.
std::string format_config(const TrainConfig& config);

}  // namespace enzkg

#endif  // ENZKG_CONFIG_HPP_
