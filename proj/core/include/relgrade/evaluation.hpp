#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relgrade/corpus.hpp"

namespace relgrade {

struct GraderVerdict;  // grading.hpp

/// Positive class = relevant.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
};

/// A metric is absent (not zero) when its denominator is zero.
struct MetricsRow {
  std::string model;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

/// accuracy = (tp+tn)/total, precision = tp/(tp+fp), recall = tp/(tp+fn),
/// f1 = 2pr/(p+r); f1 is undefined when either component is undefined or
/// zero. Throws std::domain_error on an empty matrix.
MetricsRow metrics(const ConfusionMatrix& cm);

/// Tallies graded verdicts against truth labels. Ungraded verdicts are
/// skipped and counted into *ungraded when given. A graded verdict whose key
/// is missing from truth, or matches an unlabeled pair, is a usage error.
ConfusionMatrix confusion(const std::vector<GraderVerdict>& verdicts,
                          const std::vector<PairRecord>& truth,
                          std::size_t* ungraded = nullptr);

struct ScoredGrader {
  std::string name;
  ConfusionMatrix matrix;
  MetricsRow row;
  std::size_t ungraded = 0;
};

ScoredGrader score_grader(const std::string& name,
                          const std::vector<GraderVerdict>& verdicts,
                          const std::vector<PairRecord>& truth);

/// One row per grader, input order kept. All graders must cover the
/// identical pair-key set (forced alignment) or std::invalid_argument.
std::vector<ScoredGrader> compare(
    const std::vector<std::pair<std::string, std::vector<GraderVerdict>>>& graders,
    const std::vector<PairRecord>& truth);

/// CSV: model,accuracy,precision,recall,f1,ungraded. Four decimal places;
/// undefined metrics are empty cells.
std::string report_csv(const std::vector<ScoredGrader>& rows);

/// Aligned text table; undefined metrics render as an em dash.
std::string report_text(const std::vector<ScoredGrader>& rows);

}  // namespace relgrade
