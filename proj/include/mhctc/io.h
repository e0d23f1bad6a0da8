// mhctc/io.h


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

#ifndef MHCTC_IO_H_
#define MHCTC_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mhctc/ctc.h"
#include "mhctc/features.h"
#include "mhctc/model.h"

namespace mhctc {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

// 16-bit PCM mono WAV. Samples are clipped to [-1, 1].
void write_wav(const std::string &path, std::span<const double> samples, int sample_rate);
std::vector<double> read_wav(const std::string &path, int *sample_rate = nullptr);

/// A model plus everything needed to use it and to trace where it came from.
struct Checkpoint {
  ModelParams params;
  LabelAlphabet alphabet;
  FeatureConfig features;
  /// Ordered stage names that produced this model, oldest first.
  std::vector<std::string> lineage;
  /// Digest of the checkpoint this one was fine-tuned from; empty for a
  /// freshly trained model.
  std::string parent_digest;

  bool operator==(const Checkpoint &other) const;
};

/// Versioned container: "MHCTCKPT", u32 version, u64 header length, JSON
/// header (config, alphabet, features, seed, lineage, tensor shapes), then
/// the tensors as little-endian float64.
std::string serialize(const Checkpoint &ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::string &path);

/// Hex FNV-1a of the serialized checkpoint.
std::string digest(const Checkpoint &ckpt);

struct ManifestEntry {
  std::string id;
  std::string text;       // transcription as symbols
  std::string condition;  // "clean" or "<noise>:<snr>"
  std::string wav_path;   // "-" when no waveform was written
};

/// Tab-separated: id, transcription, condition, wav path.
void write_manifest(const std::string &path, const std::vector<ManifestEntry> &entries);
std::vector<ManifestEntry> read_manifest(const std::string &path);

struct DecodeRecord {
  std::string id;
  std::string hypothesis;
  double log_prob = 0.0;
  std::string config_hash;
};

/// Tab-separated: id, hypothesis, log_prob (%.17g), decoder config hash.
void write_decode_records(const std::string &path, const std::vector<DecodeRecord> &records);
std::vector<DecodeRecord> read_decode_records(const std::string &path);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

}  // namespace mhctc

#endif  // MHCTC_IO_H_
