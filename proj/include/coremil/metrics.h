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

#ifndef COREMIL_METRICS_H_
#define COREMIL_METRICS_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace coremil {

// Core-level classification metrics. Fractions in [0, 1].
struct MetricsReport {
  double auroc = 0.0;
  double average_precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double threshold = 0.5;
  int n_cores = 0;
};

// Mann-Whitney statistic with half credit for ties. Labels are 0/1. Throws
// UndefinedMetricError unless both classes are present.
double Auroc(std::span<const double> scores, std::span<const int> labels);

// Step integration of the precision-recall curve over distinct score
// thresholds: sum_k (R_k - R_{k-1}) * P_k, tied scores forming one step.
double AveragePrecision(std::span<const double> scores, std::span<const int> labels);

// Sensitivity and specificity predict cancer when score >= threshold.
MetricsReport ComputeMetrics(std::span<const double> scores, std::span<const int> labels,
                             double threshold = 0.5);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

MeanStd SampleMeanStd(std::span<const double> values);

struct RunSummary {
  int runs = 0;
  MeanStd auroc;
  MeanStd average_precision;
  MeanStd sensitivity;
  MeanStd specificity;
};

// Requires at least two runs.
RunSummary SummarizeRuns(std::span<const MetricsReport> runs);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-tailed
};

// Welch's unequal-variance two-sample t-test. Requires >= 2 samples each.
WelchResult WelchTTest(std::span<const double> a, std::span<const double> b);

// "80.3 ± 2.0": percentages to one decimal place.
std::string FormatPercent(const MeanStd& value);

// Plain-text table with columns Method | AUROC | Avg-Prec | Sens | Spec.
std::string SummaryTable(const std::vector<std::pair<std::string, RunSummary>>& rows);

}  // namespace coremil

#endif  // COREMIL_METRICS_H_
