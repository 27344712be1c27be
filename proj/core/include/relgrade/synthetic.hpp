#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "relgrade/corpus.hpp"
#include "relgrade/grading.hpp"

namespace relgrade {

/// Knobs for the planted-relevance generator. Each query gets a unit
/// direction and a positive cosine band centered at band_lo..band_hi;
/// positives are sampled in that band, mid negatives `separation` below it,
/// and the remaining negatives uniformly on the sphere so the pooled cosine
/// histogram is bimodal.
struct SyntheticSpec {
  std::size_t dim = 384;
  std::size_t n_documents = 10000;
  std::size_t n_queries = 16;
  double positive_rate = 0.123;  // strictly inside (0, 1)
  double noise_scale = 0.04;     // cosine jitter inside a band
  double band_lo = 0.55;         // positive band centers drawn in [band_lo, band_hi]
  double band_hi = 0.85;
  double separation = 0.20;      // gap between a query's positive and mid bands
  double mid_fraction = 0.5;     // share of negatives in the mid band
  std::size_t pairs_per_query_date = 5;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a degenerate spec (dim < 2, counts < 1,
  /// positive_rate outside (0,1), non-positive noise, bad bands).
  void validate() const;
};

/// One document per pair: documents, queries, the labeled retrieval-shaped
/// pair list, and a dated gold entry per pair.
struct SyntheticDataset {
  std::vector<Document> documents;
  std::vector<Query> queries;
  std::vector<PairRecord> pairs;
  std::vector<GoldEntry> gold;
};

/// Deterministic under spec.seed. Exactly llround(positive_rate *
/// n_documents) positive pairs; embeddings unit-norm; pair cosines are the
/// recomputed query/document cosines; ranks order each (query, date) group
/// by descending cosine.
SyntheticDataset generate(const SyntheticSpec& spec);

/// Dateless gold labels over the full query x document cross product: true
/// exactly for the planted positive assignments. Covers anything a real
/// index retrieves from the synthetic corpus.
std::vector<GoldEntry> cross_gold(const SyntheticDataset& dataset);

}  // namespace relgrade
