/*
 * Copyright 2026 The coremil Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "coremil/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "coremil/errors.h"

namespace coremil {
namespace {

struct ClassCounts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

ClassCounts CheckInputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("scores and labels differ in length");
  }
  ClassCounts c;
  for (int y : labels) {
    if (y == 1) {
      ++c.positives;
    } else if (y == 0) {
      ++c.negatives;
    } else {
      throw InvalidArgument("labels must be 0 or 1");
    }
  }
  if (c.positives == 0 || c.negatives == 0) {
    throw UndefinedMetricError("ranking metrics need both classes present");
  }
  return c;
}

std::vector<std::size_t> OrderByScore(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

}  // namespace

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts counts = CheckInputs(scores, labels);
  const std::vector<std::size_t> order = OrderByScore(scores, /*descending=*/false);
  // Twice the midrank of a tie group spanning 1-based ranks [first, last] is
  // first + last, an integer, so the statistic stays exact.
  std::int64_t twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const auto twice_midrank = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum += twice_midrank;
    }
    i = j + 1;
  }
  const std::int64_t p = counts.positives;
  const std::int64_t twice_u = twice_rank_sum - p * (p + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(p * counts.negatives));
}

double AveragePrecision(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts counts = CheckInputs(scores, labels);
  const std::vector<std::size_t> order = OrderByScore(scores, /*descending=*/true);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) ++tp; else ++fp;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(counts.positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

MetricsReport ComputeMetrics(std::span<const double> scores, std::span<const int> labels,
                             double threshold) {
  const ClassCounts counts = CheckInputs(scores, labels);
  MetricsReport r;
  r.auroc = Auroc(scores, labels);
  r.average_precision = AveragePrecision(scores, labels);
  std::int64_t tp = 0, tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_cancer = scores[i] >= threshold;
    if (labels[i] == 1 && predicted_cancer) ++tp;
    if (labels[i] == 0 && !predicted_cancer) ++tn;
  }
  r.sensitivity = static_cast<double>(tp) / static_cast<double>(counts.positives);
  r.specificity = static_cast<double>(tn) / static_cast<double>(counts.negatives);
  r.threshold = threshold;
  r.n_cores = static_cast<int>(scores.size());
  return r;
}

MeanStd SampleMeanStd(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("need at least two values for a sample std");
  const double n = static_cast<double>(values.size());
  // Shifting by the first value keeps identical samples exact (std == 0).
  const double shift = values.front();
  double offset = 0.0;
  for (double v : values) offset += v - shift;
  const double mean = shift + offset / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

RunSummary SummarizeRuns(std::span<const MetricsReport> runs) {
  if (runs.size() < 2) throw InvalidArgument("a multi-run summary needs at least two runs");
  auto column = [&](double MetricsReport::*field) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const MetricsReport& r : runs) v.push_back(r.*field);
    return SampleMeanStd(v);
  };
  RunSummary s;
  s.runs = static_cast<int>(runs.size());
  s.auroc = column(&MetricsReport::auroc);
  s.average_precision = column(&MetricsReport::average_precision);
  s.sensitivity = column(&MetricsReport::sensitivity);
  s.specificity = column(&MetricsReport::specificity);
  return s;
}

WelchResult WelchTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InvalidArgument("Welch's test needs at least two samples per group");
  }
  const MeanStd ma = SampleMeanStd(a);
  const MeanStd mb = SampleMeanStd(b);
  const double va = ma.std * ma.std / static_cast<double>(a.size());
  const double vb = mb.std * mb.std / static_cast<double>(b.size());
  const double diff = ma.mean - mb.mean;
  WelchResult r;
  if (va + vb == 0.0) {
    // Both groups constant: identical means are indistinguishable, distinct
    // means are separated with certainty.
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

std::string FormatPercent(const MeanStd& value) {
  return fmt::format("{:.1f} ± {:.1f}", 100.0 * value.mean, 100.0 * value.std);
}

std::string SummaryTable(const std::vector<std::pair<std::string, RunSummary>>& rows) {
  std::size_t name_width = 6;
  for (const auto& [name, _] : rows) name_width = std::max(name_width, name.size());
  std::string out = fmt::format("{:<{}} | {:>12} | {:>12} | {:>12} | {:>12}\n", "Method",
                                name_width, "AUROC", "Avg-Prec", "Sens", "Spec");
  out += std::string(name_width + 4 * 15, '-') + "\n";
  for (const auto& [name, s] : rows) {
    out += fmt::format("{:<{}} | {:>12} | {:>12} | {:>12} | {:>12}\n", name, name_width,
                       FormatPercent(s.auroc), FormatPercent(s.average_precision),
                       FormatPercent(s.sensitivity), FormatPercent(s.specificity));
  }
  return out;
}

}  // namespace coremil
