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

#ifndef ENZKG_COMMON_HPP_
#define ENZKG_COMMON_HPP_

#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace enzkg {

// Base of every error thrown by the library. category() is a short
// machine-parsable token used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* category() const noexcept { return "runtime"; }
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const char* category() const noexcept override { return "parse"; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "shape"; }
};

class OutOfVocabularyError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "out-of-vocabulary"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "numerical"; }
};

// Dense index wrapper; Tag keeps compound, enzyme and hyperedge ids apart.
template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}
  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

struct CompoundTag {};
struct EnzymeTag {};
struct HyperedgeTag {};
using CompoundId = StrongId<CompoundTag>;
using EnzymeId = StrongId<EnzymeTag>;
using HyperedgeId = StrongId<HyperedgeTag>;

using Rng = std::mt19937_64;

// Independent generator for a named consumer of the run seed, so adding a
// draw in one module never shifts the stream of another.
Rng make_rng(std::uint64_t seed, std::string_view stream);

}  // namespace enzkg

template <typename Tag>
struct std::hash<enzkg::StrongId<Tag>> {
  std::size_t operator()(enzkg::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};

#endif  // ENZKG_COMMON_HPP_
