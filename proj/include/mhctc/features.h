// mhctc/features.h


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

#ifndef MHCTC_FEATURES_H_
#define MHCTC_FEATURES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mhctc/ctc.h"
#include "mhctc/matrix.h"

namespace mhctc {

enum class NoiseKind { kNone, kBabble, kBandLimited };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string &name);

/// Two sinusoid frequencies rendered for one symbol.
struct SymbolTemplate {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct SynthConfig {
  LabelAlphabet alphabet{"abcde"};
  int sample_rate = 8000;
  double symbol_ms_min = 60.0;
  double symbol_ms_max = 120.0;
  /// One per symbol; empty means default_templates().
  std::vector<SymbolTemplate> templates;
  NoiseKind noise_kind = NoiseKind::kNone;
  /// SNR of noisy utterances; drawn uniformly from [snr_db, snr_db_max]
  /// when snr_db_max is set.
  double snr_db = 10.0;
  std::optional<double> snr_db_max;
  /// Fraction of utterances left clean when noise_kind != kNone.
  double clean_fraction = 0.0;
  /// Relative per-occurrence frequency jitter of the rendered tones.
  double freq_jitter = 0.02;
  std::uint64_t seed = 1;
};

/// Symbol templates placed on the centers of the default 12-band mel bank,
/// greedily thinned to >= 200 Hz spacing. Falls back to mel-uniform spacing
/// for large alphabets.
std::vector<SymbolTemplate> default_templates(int num_symbols, int sample_rate);

/// Throws ConfigError when templates are missing, out of band or closer than
/// 200 Hz across distinct symbols.
void validate(const SynthConfig &cfg);

struct Condition {
  NoiseKind kind = NoiseKind::kNone;
  double snr_db = 0.0;  // meaningful only when noisy
  bool noisy() const { return kind != NoiseKind::kNone; }
  bool operator==(const Condition &) const = default;
};

std::string to_string(const Condition &c);
Condition condition_from_string(const std::string &text);

struct Utterance {
  std::string id;
  std::vector<double> waveform;
  int sample_rate = 8000;
  Transcription transcription;
  Condition condition;
  /// 10 log10(P_signal / P_noise) measured on the scaled components before
  /// they were summed; NaN for clean utterances.
  double realized_snr_db = 0.0;
};

/// Speech part of an utterance: concatenated two-tone symbols with a raised
/// cosine envelope per symbol.
std::vector<double> render_symbols(const SynthConfig &cfg, const Transcription &c,
                                   std::uint64_t seed);

/// Unit-less noise of the given kind, `samples` long.
std::vector<double> generate_noise(const SynthConfig &cfg, NoiseKind kind,
                                   size_t samples, std::uint64_t seed);

/// Copy of `noise` scaled so that 10 log10(P_signal / P_noise) = snr_db.
std::vector<double> scale_noise_to_snr(std::span<const double> signal,
                                       std::span<const double> noise,
                                       double snr_db);

double mean_power(std::span<const double> x);

/// `n_utts` utterances with uniformly drawn transcriptions of length in
/// [len_min, len_max]. Each utterance uses a seed derived from cfg.seed and
/// its index, so the corpus is deterministic.
std::vector<Utterance> synth_corpus(const SynthConfig &cfg, int n_utts, int len_min,
                                    int len_max, const std::string &id_prefix = "utt");

enum class FeatureKind { kFbank, kSte };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string &name);

struct FeatureConfig {
  FeatureKind kind = FeatureKind::kFbank;
  int n_bands = 12;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  bool add_deltas = true;
  double log_floor = 1e-10;
  double low_hz = 20.0;
  /// Low-pass cutoff of the STE envelope follower.
  double envelope_cutoff_hz = 30.0;

  int dim() const { return add_deltas ? 3 * n_bands : n_bands; }
};

/// Mel-spaced triangular filters over the bins of an fft_size-point FFT.
struct MelBank {
  std::vector<double> center_hz;  // n_bands
  Matrix weights;                 // n_bands x (fft_size / 2 + 1)
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Centers of n_bands triangles spaced evenly in mel over [low_hz, nyquist].
std::vector<double> mel_band_centers(int n_bands, double low_hz, double high_hz);
MelBank make_mel_bank(int n_bands, int fft_size, int sample_rate, double low_hz);

/// Index of the band whose center is nearest to `hz` on the mel scale.
int nearest_band(const std::vector<double> &center_hz, double hz);

/// floor((samples - frame) / hop) + 1; throws TooShort below one frame.
int num_frames(size_t samples, int sample_rate, const FeatureConfig &cfg);

/// Log-mel filterbank energies (power spectrum of Hann-windowed frames).
Matrix fbank(std::span<const double> wave, int sample_rate, const FeatureConfig &cfg);
Matrix fbank(const Utterance &u, const FeatureConfig &cfg);

/// Subband temporal envelopes: FFT-domain mel bandpass, full-wave
/// rectification, zero-phase Butterworth low-pass, per-frame mean, log.
Matrix ste(std::span<const double> wave, int sample_rate, const FeatureConfig &cfg);
Matrix ste(const Utterance &u, const FeatureConfig &cfg);

/// Dispatches on cfg.kind.
Matrix extract_features(const Utterance &u, const FeatureConfig &cfg);

/// Regression deltas over +-2 frames with edge replication.
Matrix deltas(const Matrix &x);
/// [x, delta(x), delta(delta(x))]
Matrix append_deltas(const Matrix &x);

/// Flat binary feature cache: magic, rows, cols, dtype, config hash, data.
void save_features(const std::string &path, const Matrix &features,
                   std::uint64_t config_hash);
Matrix load_features(const std::string &path, std::uint64_t *config_hash = nullptr);

}  // namespace mhctc

#endif  // MHCTC_FEATURES_H_
