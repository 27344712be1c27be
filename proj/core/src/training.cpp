#include "relgrade/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "jsonl_util.hpp"
#include "relgrade/errors.hpp"
#include "relgrade/random.hpp"

namespace relgrade {

namespace {

constexpr double kPi = 3.141592653589793;

int require_label(const PairRecord& p) {
  if (!p.label) {
    throw std::invalid_argument("pair (" + p.query_id + ", " + p.doc_id +
                                ") is unlabeled");
  }
  return *p.label ? 1 : 0;
}

std::string format_metric_cell(const std::optional<double>& m) {
  if (!m) return "";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.4f", *m);
  return buf;
}

}  // namespace

std::string to_string(LossKind k) {
  return k == LossKind::kCrossEntropy ? "cross_entropy" : "contrastive";
}

std::string to_string(Resampling r) {
  switch (r) {
    case Resampling::kNone: return "none";
    case Resampling::kOversample: return "oversample";
    default: return "undersample";
  }
}

std::optional<LossKind> loss_from_string(std::string_view s) {
  if (s == "ce" || s == "cross_entropy") return LossKind::kCrossEntropy;
  if (s == "contrastive") return LossKind::kContrastive;
  return std::nullopt;
}

std::optional<Resampling> resampling_from_string(std::string_view s) {
  if (s == "none") return Resampling::kNone;
  if (s == "over" || s == "oversample") return Resampling::kOversample;
  if (s == "under" || s == "undersample") return Resampling::kUndersample;
  return std::nullopt;
}

void TrainingConfig::validate() const {
  if (margin <= 0.0) throw std::invalid_argument("margin must be positive");
  if (peak_lr <= 0.0) throw std::invalid_argument("peak_lr must be positive");
  if (final_lr_fraction <= 0.0 || final_lr_fraction > 1.0) {
    throw std::invalid_argument("final_lr_fraction must be in (0, 1]");
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (adamw.beta1 < 0.0 || adamw.beta1 >= 1.0 || adamw.beta2 < 0.0 || adamw.beta2 >= 1.0) {
    throw std::invalid_argument("adamw betas must be in [0, 1)");
  }
  if (adamw.epsilon <= 0.0) throw std::invalid_argument("adamw epsilon must be positive");
  if (adamw.weight_decay < 0.0) {
    throw std::invalid_argument("weight_decay must be nonnegative");
  }
}

std::array<double, 2> ClassifierHead::logits(std::span<const float> features) const {
  if (features.size() != feature_dim) {
    throw std::invalid_argument("feature vector has dimension " +
                                std::to_string(features.size()) + ", head expects " +
                                std::to_string(feature_dim));
  }
  std::array<double, 2> out{bias[0], bias[1]};
  for (std::size_t c = 0; c < 2; ++c) {
    const double* w = weights.data() + c * feature_dim;
    double acc = 0.0;
    for (std::size_t f = 0; f < feature_dim; ++f) {
      acc += w[f] * static_cast<double>(features[f]);
    }
    out[c] += acc;
  }
  return out;
}

ClassifierHead init_head(std::size_t feature_dim, std::uint64_t seed) {
  if (feature_dim == 0) throw std::invalid_argument("feature_dim must be positive");
  ClassifierHead head;
  head.feature_dim = feature_dim;
  head.weights.resize(2 * feature_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  std::mt19937_64 eng(seed);
  for (auto& w : head.weights) w = rng::uniform(eng, -bound, bound);
  return head;
}

LossGrad cross_entropy_loss(const std::array<double, 2>& logits, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) {
    throw std::invalid_argument("logits must be finite");
  }
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  LossGrad out;
  out.loss = m + std::log(z) - logits[label];
  out.grad = {e0 / z - (label == 0 ? 1.0 : 0.0), e1 / z - (label == 1 ? 1.0 : 0.0)};
  return out;
}

std::array<double, 2> softmax2(const std::array<double, 2>& logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  return {e0 / z, e1 / z};
}

LossGrad contrastive_loss(const std::array<double, 2>& probs, int y, double margin) {
  if (y != 0 && y != 1) throw std::invalid_argument("y must be 0 or 1");
  if (margin <= 0.0) throw std::invalid_argument("margin must be positive");
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
  }
  const double d0 = probs[0];        // distance to onehot(relevant) = (0, 1)
  const double d1 = probs[1] - 1.0;
  const double dist = std::sqrt(d0 * d0 + d1 * d1);

  LossGrad out;
  if (y == 0) {
    out.loss = 0.5 * dist * dist;
    out.grad = {d0, d1};
    return out;
  }
  if (dist >= margin) return out;  // satisfied margin: zero loss, zero grad
  out.loss = 0.5 * (margin - dist) * (margin - dist);
  if (dist == 0.0) return out;  // gradient defined as zero at the kink
  const double scale = -(margin - dist) / dist;
  out.grad = {scale * d0, scale * d1};
  return out;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double peak,
                 double final_fraction) {
  if (total_steps == 0) throw std::invalid_argument("total_steps must be positive");
  if (step > total_steps) throw std::invalid_argument("step exceeds total_steps");
  if (peak <= 0.0) throw std::invalid_argument("peak must be positive");
  if (final_fraction <= 0.0 || final_fraction > 1.0) {
    throw std::invalid_argument("final_fraction must be in (0, 1]");
  }
  const double final_lr = final_fraction * peak;
  if (step == 0) return peak;
  if (step == total_steps) return final_lr;
  const double c =
      std::cos(kPi * static_cast<double>(step) / static_cast<double>(total_steps));
  return final_lr + (peak - final_lr) * 0.5 * (1.0 + c);
}

void adamw_step(ClassifierHead& head, const std::vector<double>& grad,
                AdamWState& state, double lr, const AdamWParams& params) {
  const std::size_t n = head.parameter_count();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw std::invalid_argument("gradient/state size does not match the head");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.step));
  const std::size_t weight_count = 2 * head.feature_dim;

  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * g;
    state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;

    double& p = i < weight_count ? head.weights[i] : head.bias[i - weight_count];
    const double old = p;
    p = old - lr * m_hat / (std::sqrt(v_hat) + params.epsilon);
    if (i < weight_count) p -= lr * params.weight_decay * old;
  }
}

std::pair<std::vector<PairRecord>, std::vector<PairRecord>> stratified_split(
    const std::vector<PairRecord>& pairs, double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("test_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (require_label(pairs[i]) ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw std::domain_error("stratified split needs both classes present");
  }

  std::mt19937_64 eng(seed);
  rng::shuffle(pos, eng);
  rng::shuffle(neg, eng);
  const auto test_pos = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(pos.size())));
  const auto test_neg = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(neg.size())));

  std::vector<bool> in_test(pairs.size(), false);
  for (std::size_t i = 0; i < test_pos; ++i) in_test[pos[i]] = true;
  for (std::size_t i = 0; i < test_neg; ++i) in_test[neg[i]] = true;

  std::vector<PairRecord> train, test;
  train.reserve(pairs.size() - test_pos - test_neg);
  test.reserve(test_pos + test_neg);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    PairRecord p = pairs[i];
    p.split = in_test[i] ? Split::kTest : Split::kTrain;
    (in_test[i] ? test : train).push_back(std::move(p));
  }
  return {std::move(train), std::move(test)};
}

std::vector<PairRecord> rebalance(const std::vector<PairRecord>& train,
                                  Resampling strategy, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < train.size(); ++i) {
    (require_label(train[i]) ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw std::domain_error("rebalancing needs both classes present");
  }
  if (strategy == Resampling::kNone) return train;

  auto& minority = pos.size() <= neg.size() ? pos : neg;
  auto& majority = pos.size() <= neg.size() ? neg : pos;

  std::mt19937_64 eng(seed);
  std::vector<std::size_t> chosen;
  if (strategy == Resampling::kOversample) {
    chosen.reserve(2 * majority.size());
    chosen.insert(chosen.end(), minority.begin(), minority.end());
    chosen.insert(chosen.end(), majority.begin(), majority.end());
    for (std::size_t i = minority.size(); i < majority.size(); ++i) {
      chosen.push_back(minority[rng::below(eng, minority.size())]);
    }
  } else {
    std::vector<std::size_t> kept = majority;
    rng::shuffle(kept, eng);
    kept.resize(minority.size());
    chosen.reserve(2 * minority.size());
    chosen.insert(chosen.end(), minority.begin(), minority.end());
    chosen.insert(chosen.end(), kept.begin(), kept.end());
  }
  rng::shuffle(chosen, eng);

  std::vector<PairRecord> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(train[i]);
  return out;
}

FeatureSource corpus_feature_source(const Corpus& corpus) {
  return [&corpus](const PairRecord& p) {
    const Query* q = corpus.find_query(p.query_id);
    if (!q) throw std::invalid_argument("pair references unknown query " + p.query_id);
    const Document* d = corpus.find_document(p.doc_id);
    if (!d) throw std::invalid_argument("pair references unknown document " + p.doc_id);
    return pair_features(q->embedding, d->embedding).values;
  };
}

namespace {

MetricsRow evaluate_head(const ClassifierHead& head,
                         const std::vector<std::vector<float>>& features,
                         const std::vector<int>& labels) {
  if (features.empty()) return {};
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto logits = head.logits(features[i]);
    const bool predicted = logits[1] > logits[0];
    const bool actual = labels[i] == 1;
    if (predicted && actual) {
      ++cm.tp;
    } else if (predicted) {
      ++cm.fp;
    } else if (actual) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return metrics(cm);
}

}  // namespace

TrainReport train(const std::vector<PairRecord>& train_pairs,
                  const std::vector<PairRecord>& test_pairs,
                  const FeatureSource& features, const TrainingConfig& config) {
  config.validate();
  if (train_pairs.empty()) throw std::domain_error("empty train set");

  const auto data = rebalance(train_pairs, config.resampling, config.seed);

  TrainReport report;
  report.config = config;
  report.train_pairs_in = train_pairs.size();
  report.train_pairs_used = data.size();

  const std::size_t n = data.size();
  std::vector<std::vector<float>> x(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = features(data[i]);
    y[i] = require_label(data[i]);
    (y[i] ? report.positives_used : report.negatives_used) += 1;
  }
  const std::size_t feature_dim = x.front().size();
  for (const auto& xi : x) {
    if (xi.size() != feature_dim) {
      throw std::invalid_argument("inconsistent feature dimensions in the train set");
    }
  }

  std::vector<std::vector<float>> test_x(test_pairs.size());
  std::vector<int> test_y(test_pairs.size());
  for (std::size_t i = 0; i < test_pairs.size(); ++i) {
    test_x[i] = features(test_pairs[i]);
    test_y[i] = require_label(test_pairs[i]);
    if (test_x[i].size() != feature_dim) {
      throw std::invalid_argument("inconsistent feature dimensions in the test set");
    }
  }

  ClassifierHead head = init_head(feature_dim, config.seed);
  AdamWState state(head.parameter_count());
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = config.epochs * batches;
  std::size_t global_step = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(head.parameter_count());
  const std::size_t weight_count = 2 * feature_dim;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 shuffle_eng(config.seed + epoch);
    rng::shuffle(order, shuffle_eng);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);

      for (std::size_t s = begin; s < end; ++s) {
        const std::size_t i = order[s];
        const auto logits = head.logits(x[i]);
        std::array<double, 2> dlogits;
        if (config.loss == LossKind::kCrossEntropy) {
          const LossGrad lg = cross_entropy_loss(logits, y[i]);
          loss_sum += lg.loss;
          dlogits = lg.grad;
        } else {
          const auto probs = softmax2(logits);
          const LossGrad lg = contrastive_loss(probs, 1 - y[i], config.margin);
          loss_sum += lg.loss;
          // chain rule through softmax: dL/dz_i = p_i (g_i - sum_j g_j p_j)
          const double mix = lg.grad[0] * probs[0] + lg.grad[1] * probs[1];
          dlogits = {probs[0] * (lg.grad[0] - mix), probs[1] * (lg.grad[1] - mix)};
        }
        for (std::size_t c = 0; c < 2; ++c) {
          double* gw = grad.data() + c * feature_dim;
          const auto& xi = x[i];
          for (std::size_t f = 0; f < feature_dim; ++f) {
            gw[f] += dlogits[c] * static_cast<double>(xi[f]);
          }
          grad[weight_count + c] += dlogits[c];
        }
      }

      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto& g : grad) g *= inv;
      const double lr =
          cosine_lr(global_step, total_steps, config.peak_lr, config.final_lr_fraction);
      ++global_step;
      adamw_step(head, grad, state, lr, config.adamw);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.test = evaluate_head(head, test_x, test_y);
    report.epochs.push_back(std::move(stats));
  }

  report.head = std::move(head);
  return report;
}

std::string train_report_csv(const TrainReport& report) {
  std::string out = "epoch,train_loss,accuracy,precision,recall,f1\n";
  for (const auto& e : report.epochs) {
    char loss[32];
    std::snprintf(loss, sizeof(loss), "%.6f", e.train_loss);
    out += std::to_string(e.epoch) + ',' + loss + ',' +
           format_metric_cell(e.test.accuracy) + ',' +
           format_metric_cell(e.test.precision) + ',' +
           format_metric_cell(e.test.recall) + ',' + format_metric_cell(e.test.f1) +
           '\n';
  }
  return out;
}

void save_head(const std::filesystem::path& path, const ClassifierHead& head,
               const TrainingConfig& config) {
  nlohmann::ordered_json j;
  j["format"] = "relgrade-head";
  j["version"] = 1;
  j["feature_dim"] = head.feature_dim;
  j["weights"] = head.weights;
  j["bias"] = head.bias;
  j["training"] = {
      {"loss", to_string(config.loss)},
      {"margin", config.margin},
      {"peak_lr", config.peak_lr},
      {"final_lr_fraction", config.final_lr_fraction},
      {"epochs", config.epochs},
      {"batch_size", config.batch_size},
      {"resampling", to_string(config.resampling)},
      {"seed", config.seed},
      {"adamw",
       {{"beta1", config.adamw.beta1},
        {"beta2", config.adamw.beta2},
        {"epsilon", config.adamw.epsilon},
        {"weight_decay", config.adamw.weight_decay}}},
  };
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

HeadCheckpoint load_head(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  try {
    if (j.at("format").get<std::string>() != "relgrade-head") {
      throw ParseError(path.string() + ": not a head checkpoint");
    }
    if (j.at("version").get<int>() != 1) {
      throw ParseError(path.string() + ": unsupported checkpoint version");
    }
    HeadCheckpoint ckpt;
    ckpt.head.feature_dim = j.at("feature_dim").get<std::size_t>();
    ckpt.head.weights = j.at("weights").get<std::vector<double>>();
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (ckpt.head.feature_dim == 0 ||
        ckpt.head.weights.size() != 2 * ckpt.head.feature_dim || bias.size() != 2) {
      throw ParseError(path.string() + ": checkpoint shape mismatch");
    }
    ckpt.head.bias = {bias[0], bias[1]};
    for (double w : ckpt.head.weights) {
      if (!std::isfinite(w)) throw ParseError(path.string() + ": non-finite weight");
    }

    const auto& t = j.at("training");
    auto loss = loss_from_string(t.at("loss").get<std::string>());
    auto resampling = resampling_from_string(t.at("resampling").get<std::string>());
    if (!loss || !resampling) {
      throw ParseError(path.string() + ": unknown loss or resampling name");
    }
    ckpt.config.loss = *loss;
    ckpt.config.resampling = *resampling;
    ckpt.config.margin = t.at("margin").get<double>();
    ckpt.config.peak_lr = t.at("peak_lr").get<double>();
    ckpt.config.final_lr_fraction = t.at("final_lr_fraction").get<double>();
    ckpt.config.epochs = t.at("epochs").get<std::size_t>();
    ckpt.config.batch_size = t.at("batch_size").get<std::size_t>();
    ckpt.config.seed = t.at("seed").get<std::uint64_t>();
    const auto& a = t.at("adamw");
    ckpt.config.adamw.beta1 = a.at("beta1").get<double>();
    ckpt.config.adamw.beta2 = a.at("beta2").get<double>();
    ckpt.config.adamw.epsilon = a.at("epsilon").get<double>();
    ckpt.config.adamw.weight_decay = a.at("weight_decay").get<double>();
    ckpt.config.validate();
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace relgrade
