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

#include "tsasd/plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tsasd/error.hpp"

namespace tsasd {

void write_score_timeline_svg(const std::string& path,
                              const std::vector<double>& scores,
                              const std::vector<int>* labels,
                              double threshold, const std::string& title) {
  const int width = 960, height = 240;
  const int left = 50, right = 20, top = 30, bottom = 40;
  const int plot_w = width - left - right;
  const int plot_h = height - top - bottom;
  const size_t n = scores.size();

  auto x_of = [&](double frame) {
    return left + (n > 1 ? frame / static_cast<double>(n - 1) * plot_w : 0.0);
  };
  auto y_of = [&](double score) { return top + (1.0 - score) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\" "
        << "font-family=\"sans-serif\">" << title << "</text>\n";
  }

  // active bands: maximal runs of score > threshold
  size_t i = 0;
  while (i < n) {
    if (scores[i] > threshold) {
      size_t j = i;
      while (j < n && scores[j] > threshold) ++j;
      svg << "<rect class=\"active-band\" data-start=\"" << i
          << "\" data-end=\"" << j << "\" x=\"" << x_of(i) << "\" y=\"" << top
          << "\" width=\"" << (x_of(j - 1) - x_of(i) + 1.0) << "\" height=\""
          << plot_h << "\" fill=\"#2e8b57\" fill-opacity=\"0.18\"/>\n";
      i = j;
    } else {
      ++i;
    }
  }

  // ground-truth strip
  if (labels != nullptr && labels->size() == n) {
    for (size_t k = 0; k < n; ++k) {
      if ((*labels)[k] == 1) {
        svg << "<rect x=\"" << x_of(k) << "\" y=\"" << (top + plot_h + 8)
            << "\" width=\"" << (plot_w / std::max<double>(1.0, n - 1.0) + 1)
            << "\" height=\"6\" fill=\"#444\"/>\n";
      }
    }
    svg << "<text x=\"" << left << "\" y=\"" << (top + plot_h + 28)
        << "\" font-size=\"10\" font-family=\"sans-serif\">ground truth"
        << "</text>\n";
  }

  // threshold line
  svg << "<line x1=\"" << left << "\" y1=\"" << y_of(threshold) << "\" x2=\""
      << (left + plot_w) << "\" y2=\"" << y_of(threshold)
      << "\" stroke=\"#aa3333\" stroke-dasharray=\"5,4\"/>\n";

  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << (top + plot_h) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << (top + plot_h) << "\" x2=\""
      << (left + plot_w) << "\" y2=\"" << (top + plot_h)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"8\" y=\"" << (y_of(1.0) + 4)
      << "\" font-size=\"10\" font-family=\"sans-serif\">1.0</text>\n";
  svg << "<text x=\"8\" y=\"" << (y_of(0.0) + 4)
      << "\" font-size=\"10\" font-family=\"sans-serif\">0.0</text>\n";

  // score polyline
  if (n > 0) {
    svg << "<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.5\" "
        << "points=\"";
    for (size_t k = 0; k < n; ++k) {
      svg << x_of(k) << "," << y_of(scores[k]) << " ";
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw IoError("cannot write plot: " + path);
  out << svg.str();
  if (!out) throw IoError("short write to plot: " + path);
}

}  // namespace tsasd
