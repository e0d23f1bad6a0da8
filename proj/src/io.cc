// src/io.cc


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

#include "mhctc/io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mhctc/errors.h"
#include "mhctc/json.h"

namespace mhctc {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_file(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, std::string_view contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!os) throw FormatError("failed writing " + path);
}

namespace {

template <typename T>
void append(std::string &out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view &in) {
  if (in.size() < sizeof(T)) throw FormatError("unexpected end of data");
  T v;
  std::memcpy(&v, in.data(), sizeof(T));
  in.remove_prefix(sizeof(T));
  return v;
}

}  // namespace

void write_wav(const std::string &path, std::span<const double> samples, int sample_rate) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.append("RIFF");
  append<std::uint32_t>(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  append<std::uint32_t>(out, 16);
  append<std::uint16_t>(out, 1);  // PCM
  append<std::uint16_t>(out, 1);  // mono
  append<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  append<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate * 2));
  append<std::uint16_t>(out, 2);
  append<std::uint16_t>(out, 16);
  out.append("data");
  append<std::uint32_t>(out, data_bytes);
  for (double s : samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    append<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clipped * 32767.0)));
  }
  write_file(path, out);
}

std::vector<double> read_wav(const std::string &path, int *sample_rate) {
  const std::string bytes = read_file(path);
  std::string_view in(bytes);
  if (in.substr(0, 4) != "RIFF" || in.substr(8, 4) != "WAVE")
    throw FormatError(path + ": not a RIFF/WAVE file");
  in.remove_prefix(12);
  int rate = 0, bits = 0, channels = 0;
  while (in.size() >= 8) {
    const std::string_view tag = in.substr(0, 4);
    in.remove_prefix(4);
    const auto size = take<std::uint32_t>(in);
    if (in.size() < size) throw FormatError(path + ": truncated chunk");
    std::string_view body = in.substr(0, size);
    in.remove_prefix(size + (size & 1));
    if (tag == "fmt ") {
      if (take<std::uint16_t>(body) != 1) throw FormatError(path + ": only PCM is supported");
      channels = take<std::uint16_t>(body);
      rate = static_cast<int>(take<std::uint32_t>(body));
      take<std::uint32_t>(body);
      take<std::uint16_t>(body);
      bits = take<std::uint16_t>(body);
    } else if (tag == "data") {
      if (bits != 16 || channels != 1) throw FormatError(path + ": expected 16-bit mono");
      std::vector<double> samples(size / 2);
      for (auto &s : samples) s = take<std::int16_t>(body) / 32767.0;
      if (sample_rate != nullptr) *sample_rate = rate;
      return samples;
    }
  }
  throw FormatError(path + ": no data chunk");
}

namespace {

constexpr char kCkptMagic[8] = {'M', 'H', 'C', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

void append_tensor(std::string &out, const double *data, Eigen::Index n) {
  out.append(reinterpret_cast<const char *>(data), static_cast<size_t>(n) * sizeof(double));
}

void take_tensor(std::string_view &in, double *data, Eigen::Index n) {
  const size_t bytes = static_cast<size_t>(n) * sizeof(double);
  if (in.size() < bytes) throw FormatError("checkpoint: truncated tensor data");
  std::memcpy(data, in.data(), bytes);
  in.remove_prefix(bytes);
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint &o) const {
  json a, b;
  to_json(a, features);
  to_json(b, o.features);
  return params == o.params && alphabet == o.alphabet && a == b && lineage == o.lineage &&
         parent_digest == o.parent_digest;
}

std::string serialize(const Checkpoint &ckpt) {
  const ModelParams &p = ckpt.params;
  json header;
  header["model"] = p.config;
  header["seed"] = p.seed;
  header["alphabet"] = ckpt.alphabet.symbols();
  header["features"] = ckpt.features;
  header["lineage"] = ckpt.lineage;
  header["parent"] = ckpt.parent_digest;
  header["tensors"] = json::array({
      json{{"name", "input_mean"}, {"shape", {p.input_mean.size()}}},
      json{{"name", "input_scale"}, {"shape", {p.input_scale.size()}}},
      json{{"name", "w1"}, {"shape", {p.w1.rows(), p.w1.cols()}}},
      json{{"name", "b1"}, {"shape", {p.b1.size()}}},
      json{{"name", "w2"}, {"shape", {p.w2.rows(), p.w2.cols()}}},
      json{{"name", "b2"}, {"shape", {p.b2.size()}}},
  });
  const std::string text = header.dump();

  std::string out(kCkptMagic, sizeof(kCkptMagic));
  append<std::uint32_t>(out, kCkptVersion);
  append<std::uint64_t>(out, text.size());
  out += text;
  append_tensor(out, p.input_mean.data(), p.input_mean.size());
  append_tensor(out, p.input_scale.data(), p.input_scale.size());
  append_tensor(out, p.w1.data(), p.w1.size());
  append_tensor(out, p.b1.data(), p.b1.size());
  append_tensor(out, p.w2.data(), p.w2.size());
  append_tensor(out, p.b2.data(), p.b2.size());
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view in) {
  if (in.size() < sizeof(kCkptMagic) || std::memcmp(in.data(), kCkptMagic, sizeof(kCkptMagic)) != 0)
    throw FormatError("not a checkpoint");
  in.remove_prefix(sizeof(kCkptMagic));
  const auto version = take<std::uint32_t>(in);
  if (version != kCkptVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = take<std::uint64_t>(in);
  if (in.size() < header_len) throw FormatError("checkpoint: truncated header");
  json header;
  Checkpoint ckpt;
  try {
    header = json::parse(in.substr(0, header_len));
    ckpt.params.config = header.at("model").get<ModelConfig>();
    ckpt.params.seed = header.at("seed").get<std::uint64_t>();
    ckpt.alphabet = LabelAlphabet(header.at("alphabet").get<std::string>());
    ckpt.features = header.at("features").get<FeatureConfig>();
    ckpt.lineage = header.at("lineage").get<std::vector<std::string>>();
    ckpt.parent_digest = header.at("parent").get<std::string>();
  } catch (const json::exception &e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  in.remove_prefix(header_len);

  const ModelConfig &c = ckpt.params.config;
  ModelParams &p = ckpt.params;
  p.input_mean.resize(c.input_dim);
  p.input_scale.resize(c.input_dim);
  p.w1.resize(c.hidden, c.window_dim());
  p.b1.resize(c.hidden);
  p.w2.resize(c.num_classes, c.hidden);
  p.b2.resize(c.num_classes);
  take_tensor(in, p.input_mean.data(), p.input_mean.size());
  take_tensor(in, p.input_scale.data(), p.input_scale.size());
  take_tensor(in, p.w1.data(), p.w1.size());
  take_tensor(in, p.b1.data(), p.b1.size());
  take_tensor(in, p.w2.data(), p.w2.size());
  take_tensor(in, p.b2.data(), p.b2.size());
  if (!in.empty()) throw FormatError("checkpoint: trailing bytes");
  if (c.num_classes != ckpt.alphabet.output_dim())
    throw FormatError("checkpoint: alphabet does not match output layer");
  return ckpt;
}

void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
  write_file(path, serialize(ckpt));
}

Checkpoint load_checkpoint(const std::string &path) {
  return deserialize_checkpoint(read_file(path));
}

std::string digest(const Checkpoint &ckpt) { return hex64(fnv1a64(serialize(ckpt))); }

namespace {

std::vector<std::string> split_tabs(const std::string &line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::vector<std::vector<std::string>> read_table(const std::string &path, size_t columns) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != columns)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(columns) + " tab-separated fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

void write_manifest(const std::string &path, const std::vector<ManifestEntry> &entries) {
  std::ostringstream os;
  os << "# id\ttranscription\tcondition\twav\n";
  for (const auto &e : entries)
    os << e.id << '\t' << e.text << '\t' << e.condition << '\t' << e.wav_path << '\n';
  write_file(path, os.str());
}

std::vector<ManifestEntry> read_manifest(const std::string &path) {
  std::vector<ManifestEntry> out;
  for (auto &f : read_table(path, 4))
    out.push_back(ManifestEntry{std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3])});
  return out;
}

void write_decode_records(const std::string &path, const std::vector<DecodeRecord> &records) {
  std::ostringstream os;
  os << "# id\thypothesis\tlog_prob\tdecoder_config\n";
  char buf[64];
  for (const auto &r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.log_prob);
    os << r.id << '\t' << r.hypothesis << '\t' << buf << '\t' << r.config_hash << '\n';
  }
  write_file(path, os.str());
}

std::vector<DecodeRecord> read_decode_records(const std::string &path) {
  std::vector<DecodeRecord> out;
  for (auto &f : read_table(path, 4))
    out.push_back(DecodeRecord{std::move(f[0]), std::move(f[1]), std::stod(f[2]), std::move(f[3])});
  return out;
}

}  // namespace mhctc
