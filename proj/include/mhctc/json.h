// mhctc/json.h


// Copyright 2026  The mhctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MHCTC_JSON_H_
#define MHCTC_JSON_H_

#include <nlohmann/json.hpp>

#include "mhctc/decode.h"
#include "mhctc/features.h"
#include "mhctc/model.h"

// JSON mappings of the configuration structs. Unknown keys are rejected and
// missing keys keep their defaults.
namespace mhctc {

void to_json(nlohmann::json &j, const ModelConfig &c);
void from_json(const nlohmann::json &j, ModelConfig &c);
void to_json(nlohmann::json &j, const TrainConfig &c);
void from_json(const nlohmann::json &j, TrainConfig &c);
void to_json(nlohmann::json &j, const FeatureConfig &c);
void from_json(const nlohmann::json &j, FeatureConfig &c);
void to_json(nlohmann::json &j, const DecodeConfig &c);
void from_json(const nlohmann::json &j, DecodeConfig &c);
void to_json(nlohmann::json &j, const SynthConfig &c);
void from_json(const nlohmann::json &j, SynthConfig &c);

/// FNV-1a of the compact dump; nlohmann objects are key-sorted, so equal
/// configs hash equally.
std::string config_hash(const nlohmann::json &j);

}  // namespace mhctc

#endif  // MHCTC_JSON_H_
