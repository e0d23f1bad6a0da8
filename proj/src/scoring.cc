// src/scoring.cc


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

#include "mhctc/scoring.h"

#include <algorithm>

#include "mhctc/errors.h"

namespace mhctc {

double WerReport::wer() const {
  if (ref_words == 0) return empty_reference ? 100.0 * errors() : 0.0;
  return 100.0 * errors() / ref_words;
}

WerReport &WerReport::operator+=(const WerReport &o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_words += o.ref_words;
  empty_reference = empty_reference || o.empty_reference;
  return *this;
}

WerReport edit_distance(const std::vector<std::string> &ref,
                        const std::vector<std::string> &hyp) {
  const size_t R = ref.size(), H = hyp.size();
  std::vector<std::vector<int>> cost(R + 1, std::vector<int>(H + 1, 0));
  for (size_t i = 0; i <= R; ++i) cost[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= H; ++j) cost[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= R; ++i)
    for (size_t j = 1; j <= H; ++j)
      cost[i][j] = std::min({cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                             cost[i - 1][j] + 1, cost[i][j - 1] + 1});

  WerReport rep;
  rep.ref_words = static_cast<int>(R);
  rep.empty_reference = R == 0 && H > 0;
  size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++rep.substitutions;
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++rep.deletions;
      --i;
    } else {
      ++rep.insertions;
      --j;
    }
  }
  return rep;
}

std::vector<std::string> chunk_words(const std::string &symbols, int word_length) {
  if (word_length < 1) throw ConfigError("word_length must be >= 1");
  std::vector<std::string> words;
  for (size_t i = 0; i < symbols.size(); i += word_length)
    words.push_back(symbols.substr(i, word_length));
  return words;
}

std::vector<std::string> characters(const std::string &symbols) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (char c : symbols) out.emplace_back(1, c);
  return out;
}

}  // namespace mhctc
