// Copyright 2026 The tsasd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tsasd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tsasd/error.hpp"

namespace tsasd {

namespace {

void check_finite(const std::vector<EvalPair>& pairs) {
  for (const EvalPair& p : pairs) {
    if (!std::isfinite(p.score)) {
      throw UndefinedMetricError("metric input has a non-finite score");
    }
    if (p.label != 0 && p.label != 1) {
      throw UndefinedMetricError("metric input has a non-binary label");
    }
  }
}

int count_positives(const std::vector<EvalPair>& pairs) {
  int n = 0;
  for (const EvalPair& p : pairs) n += p.label;
  return n;
}

}  // namespace

double average_precision(const std::vector<EvalPair>& pairs) {
  check_finite(pairs);
  int n_pos = count_positives(pairs);
  if (n_pos == 0) {
    throw UndefinedMetricError("average_precision: no positive labels");
  }
  std::vector<const EvalPair*> ranked;
  ranked.reserve(pairs.size());
  for (const EvalPair& p : pairs) ranked.push_back(&p);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const EvalPair* a, const EvalPair* b) {
                     if (a->score != b->score) return a->score > b->score;
                     return a->label > b->label;  // positives first in a tie
                   });
  double sum = 0.0;
  int tp = 0;
  for (size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i]->label == 1) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(i + 1);
    }
  }
  return sum / n_pos;
}

double mean_average_precision(const std::vector<EvalPair>& pairs) {
  return average_precision(pairs);
}

double auc(const std::vector<EvalPair>& pairs) {
  check_finite(pairs);
  int n_pos = count_positives(pairs);
  int n_neg = static_cast<int>(pairs.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("auc: needs at least one of each class");
  }
  // rank-sum with tie-averaged ranks
  std::vector<const EvalPair*> sorted;
  sorted.reserve(pairs.size());
  for (const EvalPair& p : pairs) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EvalPair* a, const EvalPair* b) {
                     return a->score < b->score;
                   });
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j]->score == sorted[i]->score) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (sorted[k]->label == 1) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  double u = pos_rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * n_neg);
}

double eer(const std::vector<EvalPair>& pairs) {
  check_finite(pairs);
  int n_pos = count_positives(pairs);
  int n_neg = static_cast<int>(pairs.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("eer: needs at least one of each class");
  }
  // Sweep acceptance thresholds from above the top score downwards;
  // acceptance is score >= threshold.
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const EvalPair& p : pairs) scores.push_back(p.score);
  std::sort(scores.begin(), scores.end(), std::greater<double>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  auto rates_at = [&](double thr) {
    int fa = 0, fr = 0;
    for (const EvalPair& p : pairs) {
      bool accept = p.score >= thr;
      if (accept && p.label == 0) ++fa;
      if (!accept && p.label == 1) ++fr;
    }
    return std::pair<double, double>{static_cast<double>(fa) / n_neg,
                                     static_cast<double>(fr) / n_pos};
  };

  // start above every score: FAR 0, FRR 1
  double prev_far = 0.0, prev_frr = 1.0;
  for (double thr : scores) {
    auto [far, frr] = rates_at(thr);
    if (far == frr) return far;
    if (far > frr) {
      // crossing happened between the previous sweep point and this one
      double denom = (far - prev_far) - (frr - prev_frr);
      if (denom == 0.0) return (far + frr) / 2.0;
      double t = (prev_frr - prev_far) / denom;
      return prev_far + t * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  // below every score: FAR 1, FRR 0
  double far = 1.0, frr = 0.0;
  double denom = (far - prev_far) - (frr - prev_frr);
  if (denom == 0.0) return (far + frr) / 2.0;
  double t = (prev_frr - prev_far) / denom;
  return prev_far + t * (far - prev_far);
}

int active_percentage_bin(double percent) {
  if (percent < 20.0) return 0;
  if (percent < 40.0) return 1;
  if (percent < 60.0) return 2;
  if (percent < 80.0) return 3;
  return 4;
}

StratifiedReport stratified_report(const std::vector<TrackPairs>& tracks) {
  static const char* kLabels[5] = {"0-20", "20-40", "40-60", "60-80",
                                   "80-100"};
  std::vector<std::vector<EvalPair>> bin_pairs(5);
  std::vector<int> bin_tracks(5, 0);
  for (const TrackPairs& t : tracks) {
    if (t.pairs.empty()) continue;
    int active = 0;
    for (const EvalPair& p : t.pairs) active += p.label;
    double percent = 100.0 * active / static_cast<double>(t.pairs.size());
    int b = active_percentage_bin(percent);
    ++bin_tracks[b];
    bin_pairs[b].insert(bin_pairs[b].end(), t.pairs.begin(), t.pairs.end());
  }
  StratifiedReport report;
  for (int b = 0; b < 5; ++b) {
    report.total_tracks += bin_tracks[b];
    if (bin_tracks[b] == 0) continue;  // empty bin reported as absent
    BinMetrics m;
    m.bin_label = kLabels[b];
    m.lo = 20.0 * b;
    m.hi = 20.0 * (b + 1);
    m.n_tracks = bin_tracks[b];
    m.n_frames = static_cast<int>(bin_pairs[b].size());
    try {
      m.ap = average_precision(bin_pairs[b]);
    } catch (const UndefinedMetricError&) {
    }
    try {
      m.auc = auc(bin_pairs[b]);
    } catch (const UndefinedMetricError&) {
    }
    try {
      m.eer = eer(bin_pairs[b]);
    } catch (const UndefinedMetricError&) {
    }
    report.bins.push_back(std::move(m));
  }
  return report;
}

}  // namespace tsasd
