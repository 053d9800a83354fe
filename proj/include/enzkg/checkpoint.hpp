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

#ifndef ENZKG_CHECKPOINT_HPP_
#define ENZKG_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>

#include "enzkg/common.hpp"
#include "enzkg/model.hpp"
#include "enzkg/trainer.hpp"

namespace enzkg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Truncated, garbled or checksum-mismatched file.
class CheckpointCorruptError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "checkpoint-corrupt"; }
};

class CheckpointVersionError : public Error {
 public:
  CheckpointVersionError(std::uint32_t found, std::uint32_t expected)
      : Error("checkpoint format version " + std::to_string(found) + ", this build reads version " +
              std::to_string(expected)),
        found_(found),
        expected_(expected) {}
  std::uint32_t found() const noexcept { return found_; }
  std::uint32_t expected() const noexcept { return expected_; }
  const char* category() const noexcept override { return "checkpoint-version"; }

 private:
  std::uint32_t found_;
  std::uint32_t expected_;
};

struct Checkpoint {
  Model model;
  TrainState state;
};

// Layout: "ENZKGCKP", u32 version, u64 payload size, payload, u64 FNV-1a
// checksum of the payload. The payload holds the config, intern tables,
// equations, split, parameters by name, optimizer state, epoch and best
// validation MRR, so a checkpoint is usable without the source data.
void write_checkpoint(std::ostream& out, const Model& model, const TrainState& state,
                      std::uint32_t version = kCheckpointVersion);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainState& state);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace enzkg

#endif  // ENZKG_CHECKPOINT_HPP_
