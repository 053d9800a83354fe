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

#include "enzkg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace enzkg {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

double in_range(const std::string& key, double v, double lo, double hi) {
  if (v < lo || v > hi) {
    throw ConfigError(key + ": " + fmt_double(v) + " outside [" + fmt_double(lo) + ", " +
                      fmt_double(hi) + "]");
  }
  return v;
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
  ConfigMap map;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    map[key] = value;
  }
  return map;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void apply_config(const ConfigMap& map, TrainConfig& c) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"learning_rate",
       [&](auto& k, auto& v) { c.learning_rate = in_range(k, to_double(k, v), 0.0, 1e3); }},
      {"batch_size", [&](auto& k, auto& v) { c.batch_size = to_uint(k, v); }},
      {"max_epochs", [&](auto& k, auto& v) { c.max_epochs = to_uint(k, v); }},
      {"patience", [&](auto& k, auto& v) { c.patience = to_uint(k, v); }},
      {"eval_every", [&](auto& k, auto& v) { c.eval_every = to_uint(k, v); }},
      {"eta1", [&](auto& k, auto& v) { c.eta1 = to_uint(k, v); }},
      {"eta2", [&](auto& k, auto& v) { c.eta2 = to_uint(k, v); }},
      {"dropout", [&](auto& k, auto& v) { c.dropout = in_range(k, to_double(k, v), 0.0, 0.99); }},
      {"regularization",
       [&](auto& k, auto& v) { c.regularization = in_range(k, to_double(k, v), 0.0, 1e3); }},
      {"dim", [&](auto& k, auto& v) { c.dim = to_uint(k, v); }},
      {"hidden_dim", [&](auto& k, auto& v) { c.hidden_dim = to_uint(k, v); }},
      {"layers", [&](auto& k, auto& v) { c.layers = to_uint(k, v); }},
      {"margin", [&](auto& k, auto& v) { c.loss.margin = to_double(k, v); }},
      {"negatives", [&](auto& k, auto& v) { c.loss.negatives = to_uint(k, v); }},
      {"adversarial_temperature",
       [&](auto& k, auto& v) {
         c.loss.temperature = in_range(k, to_double(k, v), 0.0, 1e6);
       }},
      {"corruption", [&](auto&, auto& v) { c.loss.corruption = parse_corruption(v); }},
      {"adversarial_direction",
       [&](auto&, auto& v) { c.loss.direction = parse_direction(v); }},
      {"homogeneous", [&](auto& k, auto& v) { c.homogeneous = to_bool(k, v); }},
      {"decoder", [&](auto&, auto& v) { c.decoder = parse_decoder(v); }},
      {"encoder", [&](auto&, auto& v) { c.encoder = parse_encoder(v); }},
      {"seed", [&](auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"threads", [&](auto& k, auto& v) { c.threads = to_uint(k, v); }},
  };
  for (const auto& [key, value] : map) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  if (c.dim == 0) throw ConfigError("dim must be positive");
  if (c.layers == 0) throw ConfigError("layers must be positive");
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "learning_rate = " << fmt_double(c.learning_rate) << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "max_epochs = " << c.max_epochs << "\n"
      << "patience = " << c.patience << "\n"
      << "eval_every = " << c.eval_every << "\n"
      << "eta1 = " << c.eta1 << "\n"
      << "eta2 = " << c.eta2 << "\n"
      << "dropout = " << fmt_double(c.dropout) << "\n"
      << "regularization = " << fmt_double(c.regularization) << "\n"
      << "dim = " << c.dim << "\n"
      << "hidden_dim = " << c.hidden_dim << "\n"
      << "layers = " << c.layers << "\n"
      << "margin = " << fmt_double(c.loss.margin) << "\n"
      << "negatives = " << c.loss.negatives << "\n"
      << "adversarial_temperature = " << fmt_double(c.loss.temperature) << "\n"
      << "corruption = " << to_string(c.loss.corruption) << "\n"
      << "adversarial_direction = " << to_string(c.loss.direction) << "\n"
      << "homogeneous = " << (c.homogeneous ? "true" : "false") << "\n"
      << "decoder = " << to_string(c.decoder) << "\n"
      << "encoder = " << to_string(c.encoder) << "\n"
      << "seed = " << c.seed << "\n"
      << "threads = " << c.threads << "\n";
  return out.str();
}

}  // namespace enzkg
