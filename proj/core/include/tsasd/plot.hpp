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

#ifndef TSASD_PLOT_HPP_
#define TSASD_PLOT_HPP_

#include <string>
#include <vector>

namespace tsasd {

/// Score-timeline SVG: the per-frame probability curve, a dashed line at the
/// decision threshold, green bands over frames scoring above it
/// (class="active-band" with data-start/data-end frame attributes), and an
/// optional ground-truth strip.
void write_score_timeline_svg(const std::string& path,
                              const std::vector<double>& scores,
                              const std::vector<int>* labels = nullptr,
                              double threshold = 0.5,
                              const std::string& title = "");

}  // namespace tsasd

#endif  // TSASD_PLOT_HPP_
