// mhctc/errors.h

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

#ifndef MHCTC_ERRORS_H_
#define MHCTC_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mhctc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidLabel : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// T is smaller than the minimum number of frames the labeling needs.
/// `hypothesis_index` is set when raised from a multi-hypothesis loss.
class InfeasibleAlignment : public Error {
 public:
  InfeasibleAlignment(const std::string &what, int frames, int required,
                      int hypothesis_index = -1)
      : Error(what), frames_(frames), required_(required),
        hypothesis_index_(hypothesis_index) {}
  int frames() const { return frames_; }
  int required() const { return required_; }
  int hypothesis_index() const { return hypothesis_index_; }

 private:
  int frames_;
  int required_;
  int hypothesis_index_;
};

class OracleTooLarge : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string &what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mhctc

#endif  // MHCTC_ERRORS_H_
