#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "relgrade/vectormath.hpp"

namespace relgrade {

/// One retrieval hit: document id and cosine similarity to the query.
struct SearchHit {
  std::string doc_id;
  double score = 0.0;
};

/// Retrieval output, sorted by score descending, ties by ascending doc_id.
struct SearchResult {
  std::vector<SearchHit> hits;
};

/// |top-k ids of approx ∩ top-k ids of exact| / k.
/// Throws std::invalid_argument if exact has fewer than k hits or k == 0.
double recall_at_k(const SearchResult& approx, const SearchResult& exact, std::size_t k);

/// Exact top-k index: scans every stored vector. Serves as the correctness
/// oracle for the approximate index.
class BruteForceIndex {
 public:
  BruteForceIndex() = default;
  explicit BruteForceIndex(std::size_t dim) : dim_(dim) {}

  /// Stores the vector together with its precomputed normalized copy.
  /// Throws std::invalid_argument on duplicate id or dimension mismatch,
  /// std::domain_error on a zero vector.
  void insert(const std::string& doc_id, const EmbeddingVector& v);

  /// Exact k highest-cosine entries (fewer if the index is smaller).
  /// Throws std::domain_error if the index is empty, std::invalid_argument
  /// if k == 0.
  SearchResult search(const EmbeddingVector& q, std::size_t k) const;

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_ = 0;  // 0 until first insert
  std::vector<std::string> ids_;
  std::vector<float> normalized_;  // size() * dim_, row-major
  std::unordered_map<std::string, std::uint32_t> id_to_entry_;
};

struct HnswParams {
  std::uint32_t m = 16;                // max neighbors per node per upper layer
  std::uint32_t ef_construction = 200; // candidate-list size at build
  std::uint64_t seed = 0;              // level generator seed

  std::uint32_t max_degree(int layer) const { return layer == 0 ? 2 * m : m; }
};

/// Hierarchical navigable small-world graph over cosine similarity.
/// Vectors are normalized on insert; similarity is their dot product.
/// Single-writer build; concurrent reads are safe once building stops.
class HnswIndex {
 public:
  explicit HnswIndex(std::size_t dim, HnswParams params = {});

  /// Throws std::invalid_argument on duplicate id or dimension mismatch,
  /// std::domain_error on a zero vector.
  void insert(const std::string& doc_id, const EmbeddingVector& v);

  /// Greedy descent through the upper layers, then a best-first expansion
  /// with candidate list size ef_search at layer 0.
  /// Throws std::domain_error if empty, std::invalid_argument if
  /// ef_search < k or k == 0.
  SearchResult search(const EmbeddingVector& q, std::size_t k, std::size_t ef_search) const;

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::size_t dim() const { return dim_; }
  const HnswParams& params() const { return params_; }
  int max_level() const { return max_level_; }
  double level_scale() const { return level_scale_; }

  /// Checks the graph invariants: layer nesting, degree bounds, edge
  /// validity, entry point. Throws std::logic_error naming the violation.
  void validate() const;

  struct Stats {
    std::size_t nodes = 0;
    int max_level = 0;
    std::vector<std::size_t> nodes_per_layer;   // index = layer
    double mean_degree_layer0 = 0.0;
    std::size_t max_degree_layer0 = 0;
  };
  Stats stats() const;

  /// Versioned little-endian binary format; see the file-format section of
  /// the README. Round trip is lossless, including the level-generator
  /// state, so inserts can continue after a load.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static HnswIndex load(std::istream& in);
  static HnswIndex load(const std::filesystem::path& path);

 private:
  struct Node {
    std::string id;
    int level = 0;
    // neighbors[layer] = indices into nodes_, 0 <= layer <= level
    std::vector<std::vector<std::uint32_t>> neighbors;
  };

  struct Candidate {
    double dist;           // cosine distance = 1 - dot
    std::uint32_t node;

    bool operator<(const Candidate& o) const {
      return dist != o.dist ? dist < o.dist : node < o.node;
    }
    bool operator>(const Candidate& o) const { return o < *this; }
  };

  double distance(const float* v, std::uint32_t node) const;
  const float* vec(std::uint32_t node) const { return vectors_.data() + std::size_t(node) * dim_; }
  std::uint32_t greedy_descend(const float* v, std::uint32_t start, int layer) const;
  std::vector<Candidate> search_layer(const float* v, std::uint32_t entry,
                                      std::size_t ef, int layer) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates,
                                              std::uint32_t cap) const;
  void prune_neighbors(std::uint32_t node, int layer);
  int draw_level();

  std::size_t dim_;
  HnswParams params_;
  double level_scale_;
  std::mt19937_64 level_rng_;
  std::uint64_t insert_count_ = 0;  // level draws consumed; serialized

  std::vector<Node> nodes_;
  std::vector<float> vectors_;  // normalized, row-major
  std::unordered_map<std::string, std::uint32_t> id_to_node_;
  std::uint32_t entry_point_ = kNoNode;
  int max_level_ = 0;

  static constexpr std::uint32_t kNoNode = 0xFFFFFFFFu;
};

}  // namespace relgrade
