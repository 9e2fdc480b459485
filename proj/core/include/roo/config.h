/* Copyright 2026 The ROO Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef ROO_CONFIG_H_
#define ROO_CONFIG_H_

// Single declarative configuration covering every stage, read from an
// INI-style file:
//
//   [generator]
//   seed = 7
//   k_weights = 0,0,0,1,1,1,1,0,0,0
//   conversion_rates = 1:0.3, 2:0.1
//   [joiner]
//   window_ms = 60000
//   [model]
//   architectures = two_tower, lsr
//
// Unknown sections or keys are rejected.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "roo/batcher.h"
#include "roo/generator.h"
#include "roo/joiner.h"
#include "roo/model.h"

namespace roo {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct HarnessConfig {
  GeneratorConfig generator;
  JoinerConfig joiner;
  ModelConfig model;
  BatchConfig batch;
  std::vector<Architecture> architectures = {
      Architecture::kTwoTower, Architecture::kRetrieval,
      Architecture::kRankingEncoder, Architecture::kLsr};
  std::uint32_t batch_size = 256;       // samples per batch
  std::uint32_t block_samples = 4096;   // samples per store block
  unsigned joiner_shards = 1;

  // Throws ConfigError.
  void validate() const;
};

BatchConfig default_batch_config();
HarnessConfig default_config();

// Throws ConfigError on syntax errors, unknown keys or bad values and
// std::runtime_error when the file cannot be read.
HarnessConfig load_config(const std::filesystem::path& path);
HarnessConfig parse_config(const std::string& text);

// Canonical key = value rendering, accepted back by parse_config.
std::string dump_config(const HarnessConfig& config);

}  // namespace roo

#endif  // ROO_CONFIG_H_
