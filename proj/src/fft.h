// src/fft.h


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

#ifndef MHCTC_SRC_FFT_H_
#define MHCTC_SRC_FFT_H_

#include <complex>

#include <fftw3.h>

namespace mhctc {

// Real-to-complex / complex-to-real FFT of a fixed size over FFTW-allocated
// (hence consistently aligned) buffers. The inverse is unnormalized.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }
  double *time() { return time_; }
  std::complex<double> *freq() { return reinterpret_cast<std::complex<double> *>(freq_); }

  void forward() { fftw_execute(forward_); }
  void inverse() { fftw_execute(inverse_); }

 private:
  int n_;
  double *time_;
  fftw_complex *freq_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

int next_pow2(int n);

}  // namespace mhctc

#endif  // MHCTC_SRC_FFT_H_
