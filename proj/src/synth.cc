// src/synth.cc


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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "fft.h"
#include "mhctc/errors.h"
#include "mhctc/features.h"

namespace mhctc {

namespace {

constexpr double kMinTemplateSpacingHz = 200.0;
constexpr double kPeak = 0.9;
constexpr double kEdgeSilenceMs = 30.0;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<double> white_noise(size_t samples, std::mt19937_64 &rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(samples);
  for (auto &v : x) v = gauss(rng);
  return x;
}

// Zeroes every FFT bin outside [lo_hz, hi_hz].
std::vector<double> band_pass(const std::vector<double> &x, int sample_rate,
                              double lo_hz, double hi_hz) {
  RealFft fft(next_pow2(static_cast<int>(x.size())));
  std::fill(fft.time(), fft.time() + fft.size(), 0.0);
  std::copy(x.begin(), x.end(), fft.time());
  fft.forward();
  for (int k = 0; k < fft.bins(); ++k) {
    double hz = static_cast<double>(k) * sample_rate / fft.size();
    if (hz < lo_hz || hz > hi_hz) fft.freq()[k] = 0.0;
  }
  fft.inverse();
  std::vector<double> y(fft.time(), fft.time() + x.size());
  for (auto &v : y) v /= fft.size();
  return y;
}

void normalize_power(std::vector<double> &x) {
  double p = mean_power(x);
  if (p > 0.0)
    for (auto &v : x) v /= std::sqrt(p);
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kBandLimited: return "band";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string &name) {
  if (name == "none" || name == "clean") return NoiseKind::kNone;
  if (name == "babble") return NoiseKind::kBabble;
  if (name == "band") return NoiseKind::kBandLimited;
  throw ConfigError("unknown noise kind '" + name + "' (none|babble|band)");
}

std::string to_string(const Condition &c) {
  if (!c.noisy()) return "clean";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s:%.2f", to_string(c.kind).c_str(), c.snr_db);
  return buf;
}

Condition condition_from_string(const std::string &text) {
  if (text == "clean") return Condition{};
  auto colon = text.find(':');
  if (colon == std::string::npos) throw FormatError("bad condition '" + text + "'");
  Condition c;
  c.kind = noise_kind_from_string(text.substr(0, colon));
  c.snr_db = std::stod(text.substr(colon + 1));
  return c;
}

std::vector<SymbolTemplate> default_templates(int num_symbols, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  std::vector<double> picked;
  for (double hz : mel_band_centers(12, 20.0, nyquist)) {
    if (picked.empty() || hz - picked.back() >= kMinTemplateSpacingHz) picked.push_back(hz);
  }
  if (static_cast<int>(picked.size()) < 2 * num_symbols) {
    picked.clear();
    const double lo = hz_to_mel(150.0), hi = hz_to_mel(0.9 * nyquist);
    for (int i = 0; i < 2 * num_symbols; ++i)
      picked.push_back(mel_to_hz(lo + (hi - lo) * i / std::max(1, 2 * num_symbols - 1)));
  }
  // Symbol i pairs the i-th lowest frequency with the i-th of the upper half.
  std::vector<SymbolTemplate> out(num_symbols);
  for (int i = 0; i < num_symbols; ++i)
    out[i] = SymbolTemplate{picked[i], picked[i + num_symbols]};
  return out;
}

void validate(const SynthConfig &cfg) {
  const int n = cfg.alphabet.size();
  if (cfg.sample_rate < 1000) throw ConfigError("sample_rate too low");
  if (!(cfg.symbol_ms_min > 0.0 && cfg.symbol_ms_max >= cfg.symbol_ms_min))
    throw ConfigError("symbol duration range invalid");
  if (cfg.clean_fraction < 0.0 || cfg.clean_fraction > 1.0)
    throw ConfigError("clean_fraction must be in [0, 1]");
  if (cfg.snr_db_max && *cfg.snr_db_max < cfg.snr_db)
    throw ConfigError("snr_db_max below snr_db");
  auto templates = cfg.templates.empty() ? default_templates(n, cfg.sample_rate) : cfg.templates;
  if (static_cast<int>(templates.size()) != n)
    throw ConfigError("need one symbol template per alphabet symbol");
  const double nyquist = cfg.sample_rate / 2.0;
  for (int i = 0; i < n; ++i) {
    for (double f : {templates[i].f1, templates[i].f2})
      if (!(f > 0.0 && f < nyquist)) throw ConfigError("template frequency out of band");
    for (int j = 0; j < i; ++j)
      for (double a : {templates[i].f1, templates[i].f2})
        for (double b : {templates[j].f1, templates[j].f2})
          if (std::abs(a - b) < kMinTemplateSpacingHz)
            throw ConfigError("symbol templates closer than 200 Hz");
  }
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

std::vector<double> render_symbols(const SynthConfig &cfg, const Transcription &c,
                                   std::uint64_t seed) {
  validate(c, cfg.alphabet.size());
  const auto templates = cfg.templates.empty()
                             ? default_templates(cfg.alphabet.size(), cfg.sample_rate)
                             : cfg.templates;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dur_ms(cfg.symbol_ms_min, cfg.symbol_ms_max);
  std::uniform_real_distribution<double> jitter(-cfg.freq_jitter, cfg.freq_jitter);
  std::uniform_real_distribution<double> amp1(0.6, 1.0), amp2(0.3, 0.7);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  const double sr = cfg.sample_rate;
  const size_t edge = static_cast<size_t>(kEdgeSilenceMs * sr / 1000.0);
  std::vector<double> out(edge, 0.0);
  for (int label : c.labels) {
    const SymbolTemplate &tpl = templates[label - 1];
    const size_t n = static_cast<size_t>(dur_ms(rng) * sr / 1000.0);
    const double f1 = tpl.f1 * (1.0 + jitter(rng)), f2 = tpl.f2 * (1.0 + jitter(rng));
    const double a1 = amp1(rng), a2 = amp2(rng), p1 = phase(rng), p2 = phase(rng);
    for (size_t i = 0; i < n; ++i) {
      const double env = std::pow(std::sin(std::numbers::pi * (i + 0.5) / n), 2);
      const double t = i / sr;
      out.push_back(env * (a1 * std::sin(2.0 * std::numbers::pi * f1 * t + p1) +
                           a2 * std::sin(2.0 * std::numbers::pi * f2 * t + p2)));
    }
  }
  out.insert(out.end(), edge, 0.0);
  return out;
}

std::vector<double> generate_noise(const SynthConfig &cfg, NoiseKind kind, size_t samples,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  switch (kind) {
    case NoiseKind::kNone:
      return std::vector<double>(samples, 0.0);
    case NoiseKind::kBandLimited: {
      auto x = band_pass(white_noise(samples, rng), cfg.sample_rate, 800.0, 2400.0);
      normalize_power(x);
      return x;
    }
    case NoiseKind::kBabble: {
      // A few background talkers over the same symbol inventory, with wider
      // frequency jitter, plus a wideband floor.
      SynthConfig talker_cfg = cfg;
      talker_cfg.freq_jitter = 0.08;
      std::uniform_int_distribution<int> symbol(1, cfg.alphabet.size());
      std::vector<double> mix(samples, 0.0);
      for (int talker = 0; talker < 4; ++talker) {
        std::vector<double> stream;
        while (stream.size() < samples) {
          Transcription c;
          for (int i = 0; i < 8; ++i) c.labels.push_back(symbol(rng));
          auto part = render_symbols(talker_cfg, c, rng());
          stream.insert(stream.end(), part.begin(), part.end());
        }
        const size_t offset = std::uniform_int_distribution<size_t>(0, stream.size() - samples)(rng);
        const double gain = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
        for (size_t i = 0; i < samples; ++i) mix[i] += gain * stream[offset + i];
      }
      normalize_power(mix);
      auto floor = white_noise(samples, rng);
      normalize_power(floor);
      for (size_t i = 0; i < samples; ++i) mix[i] += 0.5 * floor[i];
      normalize_power(mix);
      return mix;
    }
  }
  return std::vector<double>(samples, 0.0);
}

std::vector<double> scale_noise_to_snr(std::span<const double> signal,
                                       std::span<const double> noise, double snr_db) {
  if (signal.size() != noise.size()) throw ShapeError("signal and noise lengths differ");
  const double ps = mean_power(signal), pn = mean_power(noise);
  std::vector<double> out(noise.begin(), noise.end());
  if (pn == 0.0) return out;
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  for (auto &v : out) v *= gain;
  return out;
}

std::vector<Utterance> synth_corpus(const SynthConfig &cfg, int n_utts, int len_min,
                                    int len_max, const std::string &id_prefix) {
  validate(cfg);
  if (len_min < 1 || len_max < len_min) throw ConfigError("length range must satisfy 1 <= min <= max");
  std::vector<Utterance> corpus;
  corpus.reserve(std::max(0, n_utts));
  for (int i = 0; i < n_utts; ++i) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    Utterance u;
    char id[32];
    std::snprintf(id, sizeof(id), "%04d", i);
    u.id = id_prefix + id;
    u.sample_rate = cfg.sample_rate;
    const int len = std::uniform_int_distribution<int>(len_min, len_max)(rng);
    std::uniform_int_distribution<int> symbol(1, cfg.alphabet.size());
    for (int l = 0; l < len; ++l) u.transcription.labels.push_back(symbol(rng));

    std::vector<double> speech = render_symbols(cfg, u.transcription, rng());
    const bool clean = cfg.noise_kind == NoiseKind::kNone ||
                       std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.clean_fraction;
    const std::uint64_t noise_seed = rng();
    double snr = cfg.snr_db;
    if (cfg.snr_db_max) snr = std::uniform_real_distribution<double>(cfg.snr_db, *cfg.snr_db_max)(rng);

    std::vector<double> mixture = speech;
    u.realized_snr_db = std::numeric_limits<double>::quiet_NaN();
    if (!clean) {
      auto noise = scale_noise_to_snr(speech, generate_noise(cfg, cfg.noise_kind, speech.size(), noise_seed), snr);
      u.realized_snr_db = 10.0 * std::log10(mean_power(speech) / mean_power(noise));
      for (size_t k = 0; k < mixture.size(); ++k) mixture[k] += noise[k];
      u.condition = Condition{cfg.noise_kind, snr};
    }
    double peak = 0.0;
    for (double v : mixture) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
      for (auto &v : mixture) v *= kPeak / peak;
    u.waveform = std::move(mixture);
    corpus.push_back(std::move(u));
  }
  return corpus;
}

}  // namespace mhctc
