#include "relgrade/vectormath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relgrade {

namespace {

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<float> v) : values(std::move(v)) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("non-finite value at component " + std::to_string(i));
    }
  }
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    acc += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
  }
  return acc;
}

double norm(const EmbeddingVector& a) {
  double acc = 0.0;
  for (float v : a.values) {
    acc += static_cast<double>(v) * static_cast<double>(v);
  }
  return std::sqrt(acc);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw std::domain_error("cosine similarity is undefined for a zero vector");
  }
  const double sim = dot(a, b) / (na * nb);
  return std::clamp(sim, -1.0, 1.0);
}

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

EmbeddingVector normalize(const EmbeddingVector& a) {
  const double n = norm(a);
  if (n == 0.0) {
    throw std::domain_error("cannot normalize a zero vector");
  }
  EmbeddingVector out;
  out.values.resize(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = static_cast<float>(static_cast<double>(a.values[i]) / n);
  }
  return out;
}

EmbeddingVector pair_features(const EmbeddingVector& q, const EmbeddingVector& d) {
  require_same_dim(q, d);
  const std::size_t n = q.dim();
  EmbeddingVector out;
  out.values.resize(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = q.values[i];
    out.values[n + i] = d.values[i];
    out.values[2 * n + i] = q.values[i] * d.values[i];
    out.values[3 * n + i] = std::fabs(q.values[i] - d.values[i]);
  }
  return out;
}

}  // namespace relgrade
