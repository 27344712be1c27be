#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relgrade/corpus.hpp"
#include "relgrade/evaluation.hpp"

namespace relgrade {

enum class LossKind { kCrossEntropy, kContrastive };
enum class Resampling { kNone, kOversample, kUndersample };

std::string to_string(LossKind k);
std::string to_string(Resampling r);
std::optional<LossKind> loss_from_string(std::string_view s);
std::optional<Resampling> resampling_from_string(std::string_view s);

struct AdamWParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

struct TrainingConfig {
  LossKind loss = LossKind::kCrossEntropy;
  double margin = 1.0;
  double peak_lr = 1e-3;
  double final_lr_fraction = 0.1;
  std::size_t epochs = 20;  // 0 = no training: report stays empty, head keeps init
  std::size_t batch_size = 256;
  Resampling resampling = Resampling::kNone;
  std::uint64_t seed = 0;
  AdamWParams adamw;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Linear map from pair-feature space to 2 logits (index 0 = not relevant,
/// index 1 = relevant).
struct ClassifierHead {
  std::size_t feature_dim = 0;
  std::vector<double> weights;  // 2 x feature_dim, row-major
  std::array<double, 2> bias{0.0, 0.0};

  std::array<double, 2> logits(std::span<const float> features) const;
  std::size_t parameter_count() const { return 2 * feature_dim + 2; }
};

/// Weights ~ uniform(-1/sqrt(F), +1/sqrt(F)) from the seed, bias zero.
ClassifierHead init_head(std::size_t feature_dim, std::uint64_t seed);

struct LossGrad {
  double loss = 0.0;
  std::array<double, 2> grad{0.0, 0.0};
};

/// Stable log-sum-exp cross entropy; grad is w.r.t. the logits.
/// label: 1 = relevant.
LossGrad cross_entropy_loss(const std::array<double, 2>& logits, int label);

std::array<double, 2> softmax2(const std::array<double, 2>& logits);

/// Margin loss on softmaxed probabilities against the one-hot relevant
/// vector, D = ||probs - (0,1)||. y = 1 means NOT relevant: that branch
/// pushes D past the margin, y = 0 pulls D to zero. grad is w.r.t. probs;
/// it is zero at D = 0 and on the satisfied margin branch.
LossGrad contrastive_loss(const std::array<double, 2>& probs, int y, double margin);

/// final + (peak - final) * (1 + cos(pi * step / total)) / 2 with
/// final = final_fraction * peak; exact at both endpoints.
double cosine_lr(std::size_t step, std::size_t total_steps, double peak,
                 double final_fraction);

/// Moment accumulators over the flat parameter vector (weights, then bias).
struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamWState(std::size_t parameter_count)
      : m(parameter_count, 0.0), v(parameter_count, 0.0) {}
};

/// One decoupled-decay AdamW update; weight decay skips the bias.
/// grad layout matches AdamWState. Throws std::invalid_argument on a shape
/// mismatch.
void adamw_step(ClassifierHead& head, const std::vector<double>& grad,
                AdamWState& state, double lr, const AdamWParams& params);

/// Per-class split at test_fraction, rounded to nearest. All pairs must be
/// labeled; both classes must be present (std::domain_error otherwise).
/// Output keeps input order; membership is drawn from the seed; split tags
/// are set on the copies.
std::pair<std::vector<PairRecord>, std::vector<PairRecord>> stratified_split(
    const std::vector<PairRecord>& pairs, double test_fraction, std::uint64_t seed);

/// oversample: minority duplicated with replacement up to parity.
/// undersample: majority subsampled without replacement down to parity.
/// none: returned unchanged. Resampled outputs are shuffled by the seed.
std::vector<PairRecord> rebalance(const std::vector<PairRecord>& train,
                                  Resampling strategy, std::uint64_t seed);

/// Maps a pair to the head's input features. The corpus-backed source
/// computes pair_features(query.embedding, document.embedding).
using FeatureSource = std::function<std::vector<float>(const PairRecord&)>;
FeatureSource corpus_feature_source(const Corpus& corpus);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  MetricsRow test;  // all-undefined when no test pairs were given
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  ClassifierHead head;
  std::size_t train_pairs_in = 0;
  std::size_t train_pairs_used = 0;  // after resampling
  std::size_t positives_used = 0;
  std::size_t negatives_used = 0;
  TrainingConfig config;
};

/// Minibatch AdamW training of the head; deterministic under config.seed.
/// Throws std::invalid_argument on unlabeled pairs, std::domain_error on an
/// empty or single-class train set.
TrainReport train(const std::vector<PairRecord>& train_pairs,
                  const std::vector<PairRecord>& test_pairs,
                  const FeatureSource& features, const TrainingConfig& config);

/// CSV: epoch,train_loss,accuracy,precision,recall,f1 (metrics from the test
/// snapshot; undefined metrics are empty cells).
std::string train_report_csv(const TrainReport& report);

struct HeadCheckpoint {
  ClassifierHead head;
  TrainingConfig config;
};

/// JSON checkpoint, byte-stable for identical inputs.
void save_head(const std::filesystem::path& path, const ClassifierHead& head,
               const TrainingConfig& config);
HeadCheckpoint load_head(const std::filesystem::path& path);

}  // namespace relgrade
