// Copyright 2026 The Overair Authors.
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


#include "overair/ctc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "overair/error.hpp"

namespace overair {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

Vocab::Vocab(std::string symbols) : symbols_(std::move(symbols)) {
  Require(!symbols_.empty(), ErrorKind::kConfig, "vocabulary is empty");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    Require(symbols_.find(symbols_[i]) == i, ErrorKind::kConfig,
            std::string("duplicate vocabulary symbol '") + symbols_[i] + "'");
    Require(symbols_[i] != '_' && std::isgraph(static_cast<unsigned char>(symbols_[i])),
            ErrorKind::kConfig, "vocabulary symbols must be printable and not '_'");
  }
}

std::vector<int> Vocab::Encode(const std::string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) {
    const auto pos = symbols_.find(c);
    Require(pos != std::string::npos, ErrorKind::kInvalidInput,
            std::string("symbol '") + c + "' is not in the vocabulary");
    out.push_back(static_cast<int>(pos) + 1);
  }
  return out;
}

std::string Vocab::Decode(std::span<const int> labels) const {
  std::string out;
  for (int l : labels) {
    Require(l >= 1 && static_cast<std::size_t>(l) < size(), ErrorKind::kInvalidInput,
            "label outside the vocabulary");
    out.push_back(symbols_[l - 1]);
  }
  return out;
}

std::size_t CtcMinFrames(std::span<const int> target) {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) n += target[i] == target[i - 1];
  return n;
}

CtcResult CtcLoss(const Logits& logits, std::span<const int> target, bool with_gradient) {
  const std::size_t T = logits.frames, V = logits.vocab;
  Require(V >= 2 && logits.data.size() == T * V, ErrorKind::kInvalidInput,
          "logits shape is inconsistent");
  for (int l : target) {
    Require(l >= 1 && static_cast<std::size_t>(l) < V, ErrorKind::kInvalidInput,
            "target label outside the vocabulary");
  }
  Require(T >= CtcMinFrames(target) && T > 0, ErrorKind::kInvalidInput,
          "target needs " + std::to_string(CtcMinFrames(target)) + " frames, logits have " +
              std::to_string(T));

  // Log-softmax per frame.
  std::vector<double> logp(T * V);
  for (std::size_t t = 0; t < T; ++t) {
    const double* row = &logits.data[t * V];
    const double mx = *std::max_element(row, row + V);
    double z = 0.0;
    for (std::size_t k = 0; k < V; ++k) z += std::exp(row[k] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t k = 0; k < V; ++k) logp[t * V + k] = row[k] - lse;
  }

  // Extended labels: blank, l1, blank, l2, ..., blank.
  const std::size_t S = 2 * target.size() + 1;
  std::vector<int> ext(S, 0);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto can_skip = [&](std::size_t s) {
    return s >= 2 && ext[s] != 0 && ext[s] != ext[s - 2];
  };

  std::vector<double> alpha(T * S, kNegInf);
  alpha[0] = logp[ext[0]];
  if (S > 1) alpha[1] = logp[ext[1]];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[(t - 1) * S + s];
      if (s >= 1) a = LogAdd(a, alpha[(t - 1) * S + s - 1]);
      if (can_skip(s)) a = LogAdd(a, alpha[(t - 1) * S + s - 2]);
      alpha[t * S + s] = a == kNegInf ? kNegInf : a + logp[t * V + ext[s]];
    }
  }
  double log_prob = alpha[(T - 1) * S + S - 1];
  if (S > 1) log_prob = LogAdd(log_prob, alpha[(T - 1) * S + S - 2]);
  Require(std::isfinite(log_prob), ErrorKind::kNumeric, "CTC likelihood underflowed");

  CtcResult r;
  r.loss = -log_prob;
  if (!with_gradient) return r;

  // beta[t][s]: log prob of emitting the rest of the labels after frame t,
  // given the path is in state s at frame t.
  std::vector<double> beta(T * S, kNegInf);
  beta[(T - 1) * S + S - 1] = 0.0;
  if (S > 1) beta[(T - 1) * S + S - 2] = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta[(t + 1) * S + s] + logp[(t + 1) * V + ext[s]];
      if (s + 1 < S) b = LogAdd(b, beta[(t + 1) * S + s + 1] + logp[(t + 1) * V + ext[s + 1]]);
      if (s + 2 < S && can_skip(s + 2)) {
        b = LogAdd(b, beta[(t + 1) * S + s + 2] + logp[(t + 1) * V + ext[s + 2]]);
      }
      beta[t * S + s] = b;
    }
  }

  r.grad.frames = T;
  r.grad.vocab = V;
  r.grad.data.assign(T * V, 0.0);
  std::vector<double> occ(V);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occ.begin(), occ.end(), kNegInf);
    for (std::size_t s = 0; s < S; ++s) {
      occ[ext[s]] = LogAdd(occ[ext[s]], alpha[t * S + s] + beta[t * S + s]);
    }
    for (std::size_t k = 0; k < V; ++k) {
      const double y = std::exp(logp[t * V + k]);
      const double o = occ[k] == kNegInf ? 0.0 : std::exp(occ[k] - log_prob);
      r.grad.at(t, k) = y - o;
    }
  }
  return r;
}

std::vector<int> GreedyDecode(const Logits& logits) {
  std::vector<int> out;
  int prev = -1;
  for (std::size_t t = 0; t < logits.frames; ++t) {
    const double* row = &logits.data[t * logits.vocab];
    const int best = static_cast<int>(std::max_element(row, row + logits.vocab) - row);
    if (best != prev && best != 0) out.push_back(best);
    prev = best;
  }
  return out;
}

std::string GreedyDecode(const Logits& logits, const Vocab& vocab) {
  return vocab.Decode(GreedyDecode(logits));
}

}  // namespace overair
