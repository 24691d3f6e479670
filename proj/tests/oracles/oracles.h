// Copyright 2026 The invlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Brute-force reference implementations used to cross-check the metrics.
// Written for clarity rather than speed: full DP tables, nested loops, no
// hashing. Nothing here calls into the library.

#ifndef INVLAB_TESTS_ORACLES_ORACLES_H_
#define INVLAB_TESTS_ORACLES_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

using Seq = std::vector<std::int32_t>;

// Full (n+1) x (m+1) table.
template <typename S>
std::size_t Levenshtein(const S& a, const S& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t best = d[i - 1][j] + 1;
      best = std::min(best, d[i][j - 1] + 1);
      best = std::min(best, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u));
      d[i][j] = best;
    }
  }
  return d[n][m];
}

inline std::size_t Lcs(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> t(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1
                                     : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[n][m];
}

inline bool SameGram(const Seq& a, std::size_t i, const Seq& b, std::size_t j,
                     std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (a[i + k] != b[j + k]) return false;
  }
  return true;
}

// Clipped n-gram matches by exhaustive counting: for each candidate n-gram
// position, count its occurrences in both sequences, and credit each
// distinct gram once with min(count_cand, count_ref).
inline std::size_t ClippedMatches(const Seq& cand, const Seq& ref, std::size_t n) {
  if (cand.size() < n) return 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i + n <= cand.size(); ++i) {
    bool first = true;
    for (std::size_t p = 0; p < i; ++p) {
      if (SameGram(cand, p, cand, i, n)) {
        first = false;
        break;
      }
    }
    if (!first) continue;
    std::size_t in_cand = 0, in_ref = 0;
    for (std::size_t p = 0; p + n <= cand.size(); ++p) in_cand += SameGram(cand, p, cand, i, n);
    for (std::size_t p = 0; p + n <= ref.size(); ++p) in_ref += SameGram(ref, p, cand, i, n);
    total += std::min(in_cand, in_ref);
  }
  return total;
}

// Uniform weights, add-one on zero clipped counts for orders >= 2, brevity
// penalty exp(1 - r/c) when c < r. Orders longer than the candidate are
// skipped (precision 1).
inline double Bleu(const Seq& cand, const Seq& ref, int max_order) {
  if (cand.empty()) return 0.0;
  double product = 1.0;
  for (int k = 1; k <= max_order; ++k) {
    const std::size_t n = static_cast<std::size_t>(k);
    if (cand.size() < n) continue;
    const double count = static_cast<double>(cand.size() - n + 1);
    const std::size_t m = ClippedMatches(cand, ref, n);
    double p;
    if (m > 0) {
      p = static_cast<double>(m) / count;
    } else if (k == 1) {
      return 0.0;
    } else {
      p = 1.0 / count;
    }
    product *= std::pow(p, 1.0 / max_order);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  return (c < r ? std::exp(1.0 - r / c) : 1.0) * product;
}

struct Prf {
  double precision, recall, f1;
};

inline Prf MakePrf(double overlap, double predicted, double relevant) {
  Prf out{};
  out.precision = predicted > 0 ? overlap / predicted : 0.0;
  out.recall = overlap / relevant;
  out.f1 = out.precision + out.recall > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

inline double RougeRecall(const Seq& cand, const Seq& ref, bool lcs) {
  const double overlap = static_cast<double>(lcs ? Lcs(cand, ref) : ClippedMatches(cand, ref, 1));
  return overlap / static_cast<double>(ref.size());
}

inline double RougeF(const Seq& cand, const Seq& ref, bool lcs) {
  const double overlap = static_cast<double>(lcs ? Lcs(cand, ref) : ClippedMatches(cand, ref, 1));
  return MakePrf(overlap, static_cast<double>(cand.size()),
                 static_cast<double>(ref.size())).f1;
}

// Multiset matching by greedy pairing: each predicted token consumes one
// unused equal reference token.
inline std::size_t MultisetOverlap(const Seq& pred, const Seq& ref) {
  std::vector<bool> used(ref.size(), false);
  std::size_t hits = 0;
  for (auto t : pred) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == t) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  return hits;
}

inline Seq Distinct(const Seq& s) {
  Seq out;
  for (auto t : s) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

inline Prf MicroPrf(const std::vector<Seq>& preds, const std::vector<Seq>& refs,
                    bool set_mode) {
  double overlap = 0, predicted = 0, relevant = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Seq p = set_mode ? Distinct(preds[i]) : preds[i];
    const Seq r = set_mode ? Distinct(refs[i]) : refs[i];
    overlap += static_cast<double>(MultisetOverlap(p, r));
    predicted += static_cast<double>(p.size());
    relevant += static_cast<double>(r.size());
  }
  return MakePrf(overlap, predicted, relevant);
}

}  // namespace oracle

#endif  // INVLAB_TESTS_ORACLES_ORACLES_H_
