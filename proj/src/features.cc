// src/features.cc


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
#include <cstring>
#include <fstream>
#include <numbers>

#include "fft.h"
#include "mhctc/errors.h"
#include "mhctc/features.h"

namespace mhctc {

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::kFbank ? "fbank" : "ste";
}

FeatureKind feature_kind_from_string(const std::string &name) {
  if (name == "fbank") return FeatureKind::kFbank;
  if (name == "ste") return FeatureKind::kSte;
  throw ConfigError("unknown feature kind '" + name + "' (fbank|ste)");
}

double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

std::vector<double> mel_band_centers(int n_bands, double low_hz, double high_hz) {
  const double lo = hz_to_mel(low_hz), hi = hz_to_mel(high_hz);
  const double step = (hi - lo) / (n_bands + 1);
  std::vector<double> centers(n_bands);
  for (int b = 0; b < n_bands; ++b) centers[b] = mel_to_hz(lo + step * (b + 1));
  return centers;
}

MelBank make_mel_bank(int n_bands, int fft_size, int sample_rate, double low_hz) {
  const double nyquist = sample_rate / 2.0;
  if (n_bands < 1 || !(low_hz >= 0.0 && low_hz < nyquist))
    throw ConfigError("invalid mel bank configuration");
  const double lo = hz_to_mel(low_hz), hi = hz_to_mel(nyquist);
  const double step = (hi - lo) / (n_bands + 1);
  const int bins = fft_size / 2 + 1;
  MelBank bank;
  bank.center_hz = mel_band_centers(n_bands, low_hz, nyquist);
  bank.weights = Matrix::Zero(n_bands, bins);
  for (int b = 0; b < n_bands; ++b) {
    const double left = lo + step * b, center = left + step, right = center + step;
    for (int k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / fft_size);
      if (mel > left && mel < right)
        bank.weights(b, k) = mel <= center ? (mel - left) / step : (right - mel) / step;
    }
  }
  return bank;
}

int nearest_band(const std::vector<double> &center_hz, double hz) {
  int best = 0;
  double best_dist = std::abs(hz_to_mel(center_hz[0]) - hz_to_mel(hz));
  for (size_t b = 1; b < center_hz.size(); ++b) {
    double dist = std::abs(hz_to_mel(center_hz[b]) - hz_to_mel(hz));
    if (dist < best_dist) {
      best = static_cast<int>(b);
      best_dist = dist;
    }
  }
  return best;
}

namespace {

struct Framing {
  int frame = 0;
  int hop = 0;
};

Framing framing(int sample_rate, const FeatureConfig &cfg) {
  Framing f{static_cast<int>(std::lround(cfg.frame_ms * sample_rate / 1000.0)),
            static_cast<int>(std::lround(cfg.hop_ms * sample_rate / 1000.0))};
  if (f.frame < 2 || f.hop < 1) throw ConfigError("frame/hop too small for sample rate");
  if (cfg.n_bands < 1 || !(cfg.log_floor > 0.0)) throw ConfigError("invalid feature configuration");
  return f;
}

Matrix finish(Matrix statics, const FeatureConfig &cfg) {
  return cfg.add_deltas ? append_deltas(statics) : statics;
}

// RBJ biquad low-pass with Q = 1/sqrt(2) (second-order Butterworth).
struct Biquad {
  double b0, b1, b2, a1, a2;

  static Biquad lowpass(double cutoff_hz, double sample_rate) {
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
    const double alpha = std::sin(w0) / std::numbers::sqrt2;
    const double cosw = std::cos(w0), a0 = 1.0 + alpha;
    return Biquad{(1.0 - cosw) / 2.0 / a0, (1.0 - cosw) / a0, (1.0 - cosw) / 2.0 / a0,
                  -2.0 * cosw / a0, (1.0 - alpha) / a0};
  }

  void run(std::vector<double> &x) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (auto &v : x) {
      const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }

  // Zero-phase: forward then time-reversed.
  void filtfilt(std::vector<double> &x) const {
    run(x);
    std::reverse(x.begin(), x.end());
    run(x);
    std::reverse(x.begin(), x.end());
  }
};

}  // namespace

int num_frames(size_t samples, int sample_rate, const FeatureConfig &cfg) {
  Framing f = framing(sample_rate, cfg);
  if (samples < static_cast<size_t>(f.frame))
    throw TooShort("utterance of " + std::to_string(samples) +
                   " samples is shorter than one frame (" + std::to_string(f.frame) + ")");
  return static_cast<int>((samples - f.frame) / f.hop) + 1;
}

Matrix fbank(std::span<const double> wave, int sample_rate, const FeatureConfig &cfg) {
  const Framing f = framing(sample_rate, cfg);
  const int T = num_frames(wave.size(), sample_rate, cfg);
  RealFft fft(next_pow2(f.frame));
  const MelBank bank = make_mel_bank(cfg.n_bands, fft.size(), sample_rate, cfg.low_hz);

  std::vector<double> window(f.frame);
  for (int n = 0; n < f.frame; ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (f.frame - 1));

  const double log_floor = std::log(cfg.log_floor);
  Matrix out(T, cfg.n_bands);
  Vector power(fft.bins());
  for (int t = 0; t < T; ++t) {
    std::fill(fft.time(), fft.time() + fft.size(), 0.0);
    for (int n = 0; n < f.frame; ++n) fft.time()[n] = wave[t * f.hop + n] * window[n];
    fft.forward();
    for (int k = 0; k < fft.bins(); ++k) power[k] = std::norm(fft.freq()[k]);
    Vector energy = bank.weights * power;
    for (int b = 0; b < cfg.n_bands; ++b)
      out(t, b) = energy[b] > cfg.log_floor ? std::log(energy[b]) : log_floor;
  }
  return finish(std::move(out), cfg);
}

Matrix fbank(const Utterance &u, const FeatureConfig &cfg) {
  return fbank(u.waveform, u.sample_rate, cfg);
}

Matrix ste(std::span<const double> wave, int sample_rate, const FeatureConfig &cfg) {
  const Framing f = framing(sample_rate, cfg);
  const int T = num_frames(wave.size(), sample_rate, cfg);
  RealFft fft(next_pow2(static_cast<int>(wave.size()) + f.frame));
  const MelBank bank = make_mel_bank(cfg.n_bands, fft.size(), sample_rate, cfg.low_hz);
  const Biquad lowpass = Biquad::lowpass(cfg.envelope_cutoff_hz, sample_rate);

  std::fill(fft.time(), fft.time() + fft.size(), 0.0);
  std::copy(wave.begin(), wave.end(), fft.time());
  fft.forward();
  std::vector<std::complex<double>> spectrum(fft.freq(), fft.freq() + fft.bins());

  const double log_floor = std::log(cfg.log_floor);
  Matrix out(T, cfg.n_bands);
  std::vector<double> band(wave.size());
  for (int b = 0; b < cfg.n_bands; ++b) {
    for (int k = 0; k < fft.bins(); ++k) fft.freq()[k] = spectrum[k] * bank.weights(b, k);
    fft.inverse();
    for (size_t n = 0; n < wave.size(); ++n) band[n] = std::abs(fft.time()[n]) / fft.size();
    lowpass.filtfilt(band);
    for (int t = 0; t < T; ++t) {
      double acc = 0.0;
      for (int n = 0; n < f.frame; ++n) acc += band[t * f.hop + n];
      // The low-pass can ring slightly negative around onsets.
      const double env = acc / f.frame;
      out(t, b) = env > cfg.log_floor ? std::log(env) : log_floor;
    }
  }
  return finish(std::move(out), cfg);
}

Matrix ste(const Utterance &u, const FeatureConfig &cfg) {
  return ste(u.waveform, u.sample_rate, cfg);
}

Matrix extract_features(const Utterance &u, const FeatureConfig &cfg) {
  return cfg.kind == FeatureKind::kFbank ? fbank(u, cfg) : ste(u, cfg);
}

Matrix deltas(const Matrix &x) {
  const int T = static_cast<int>(x.rows());
  Matrix d = Matrix::Zero(x.rows(), x.cols());
  for (int t = 0; t < T; ++t) {
    for (int n = 1; n <= 2; ++n) {
      const int ahead = std::min(t + n, T - 1), behind = std::max(t - n, 0);
      d.row(t) += n * (x.row(ahead) - x.row(behind));
    }
  }
  return d / 10.0;  // 2 * (1^2 + 2^2)
}

Matrix append_deltas(const Matrix &x) {
  Matrix d1 = deltas(x);
  Matrix d2 = deltas(d1);
  Matrix out(x.rows(), 3 * x.cols());
  out << x, d1, d2;
  return out;
}

namespace {
constexpr char kFeatMagic[8] = {'M', 'H', 'F', 'E', 'A', 'T', '0', '1'};
constexpr std::uint32_t kDtypeF64 = 1;

template <typename T>
void put(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <typename T>
T get(std::istream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  return v;
}
}  // namespace

void save_features(const std::string &path, const Matrix &features, std::uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  os.write(kFeatMagic, sizeof(kFeatMagic));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(features.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(features.cols()));
  put<std::uint32_t>(os, kDtypeF64);
  put<std::uint64_t>(os, config_hash);
  os.write(reinterpret_cast<const char *>(features.data()),
           static_cast<std::streamsize>(features.size() * sizeof(double)));
  if (!os) throw FormatError("failed writing " + path);
}

Matrix load_features(const std::string &path, std::uint64_t *config_hash) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kFeatMagic, sizeof(magic)) != 0)
    throw FormatError(path + ": not a feature file");
  const auto rows = get<std::uint32_t>(is), cols = get<std::uint32_t>(is);
  if (get<std::uint32_t>(is) != kDtypeF64) throw FormatError(path + ": unsupported dtype");
  const auto hash = get<std::uint64_t>(is);
  Matrix m(rows, cols);
  is.read(reinterpret_cast<char *>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!is) throw FormatError(path + ": truncated");
  if (config_hash != nullptr) *config_hash = hash;
  return m;
}

}  // namespace mhctc
