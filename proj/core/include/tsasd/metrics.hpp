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

#ifndef TSASD_METRICS_HPP_
#define TSASD_METRICS_HPP_

#include <optional>
#include <string>
#include <vector>

namespace tsasd {

/// One scored frame.
struct EvalPair {
  double score = 0.0;
  int label = 0;
  std::string track_id;
  int frame_index = 0;
};

/// AP over positives ranked by descending score; ties resolved by a stable
/// positives-first order within equal scores (the convention is printed in
/// report footers).
double average_precision(const std::vector<EvalPair>& pairs);

/// Pooled AP over all (frame, score, label) pairs; with a single detection
/// class, mAP reduces to the AP of the pooled pool.
double mean_average_precision(const std::vector<EvalPair>& pairs);

/// Mann-Whitney AUC: P(random positive outscores a random negative), ties
/// counted 1/2.
double auc(const std::vector<EvalPair>& pairs);

/// Equal error rate from a threshold sweep over distinct scores, linearly
/// interpolated between adjacent sweep points when there is no exact
/// crossing. False-acceptance and false-rejection rates are
/// class-conditional (FA/N, FR/P).
double eer(const std::vector<EvalPair>& pairs);

inline constexpr const char* kTiePolicyNote =
    "AP ties: positives-first stable order within equal scores";

struct BinMetrics {
  std::string bin_label;  // e.g. "0-20"
  double lo = 0.0, hi = 0.0;
  int n_tracks = 0;
  int n_frames = 0;
  std::optional<double> ap;
  std::optional<double> auc;
  std::optional<double> eer;
};

/// Per-track pairs bucketed by active-frame percentage into five bins
/// ([0,20), [20,40), [40,60), [60,80), [80,100]); empty bins are absent.
struct StratifiedReport {
  std::vector<BinMetrics> bins;
  int total_tracks = 0;
};

struct TrackPairs {
  std::string track_id;
  std::vector<EvalPair> pairs;
};

StratifiedReport stratified_report(const std::vector<TrackPairs>& tracks);

/// The bin index (0..4) for an active-frame percentage in [0, 100].
int active_percentage_bin(double percent);

}  // namespace tsasd

#endif  // TSASD_METRICS_HPP_
