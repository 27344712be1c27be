#pragma once

#include <cstddef>
#include <vector>

namespace relgrade {

/// Fixed-dimension embedding vector. Values are stored in single precision
/// (the wire format of the upstream encoders); every reduction over them is
/// accumulated in double precision.
struct EmbeddingVector {
  std::vector<float> values;

  EmbeddingVector() = default;

  /// Validating constructor: rejects NaN/Inf entries.
  explicit EmbeddingVector(std::vector<float> v);

  std::size_t dim() const { return values.size(); }

  bool operator==(const EmbeddingVector&) const = default;
};

/// Dot product, accumulated in double. Throws std::invalid_argument on
/// dimension mismatch.
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

/// L2 norm.
double norm(const EmbeddingVector& a);

/// Cosine similarity in [-1, 1] (clamped against round-off).
/// Throws std::invalid_argument on dimension mismatch and std::domain_error
/// if either vector has zero norm.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Euclidean distance. Throws std::invalid_argument on dimension mismatch.
double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// a / ||a||. Throws std::domain_error on a zero vector.
EmbeddingVector normalize(const EmbeddingVector& a);

/// Interaction features for a (query, document) pair:
/// [q ; d ; q*d ; |q-d|], dimension 4*dim. This is the input space of the
/// classification head.
EmbeddingVector pair_features(const EmbeddingVector& q, const EmbeddingVector& d);

}  // namespace relgrade
