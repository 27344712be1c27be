#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "relgrade/index.hpp"
#include "relgrade/random.hpp"

namespace relgrade {

HnswIndex::HnswIndex(std::size_t dim, HnswParams params)
    : dim_(dim), params_(params) {
  if (dim_ == 0) throw std::invalid_argument("dim must be positive");
  if (params_.m < 2) throw std::invalid_argument("M must be at least 2");
  if (params_.ef_construction < params_.m) {
    throw std::invalid_argument("ef_construction must be at least M");
  }
  level_scale_ = 1.0 / std::log(static_cast<double>(params_.m));
  level_rng_.seed(params_.seed);
}

double HnswIndex::distance(const float* v, std::uint32_t node) const {
  const float* w = vec(node);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    acc += static_cast<double>(v[i]) * static_cast<double>(w[i]);
  }
  return 1.0 - acc;  // cosine distance over normalized vectors
}

int HnswIndex::draw_level() {
  const double u = rng::u01_open(level_rng_);
  ++insert_count_;
  return static_cast<int>(std::floor(-std::log(u) * level_scale_));
}

std::uint32_t HnswIndex::greedy_descend(const float* v, std::uint32_t start, int layer) const {
  std::uint32_t cur = start;
  double cur_dist = distance(v, cur);
  for (;;) {
    std::uint32_t best = cur;
    double best_dist = cur_dist;
    for (std::uint32_t nb : nodes_[cur].neighbors[layer]) {
      const double d = distance(v, nb);
      if (d < best_dist || (d == best_dist && nb < best)) {
        best_dist = d;
        best = nb;
      }
    }
    if (best == cur) return cur;
    cur = best;
    cur_dist = best_dist;
  }
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(const float* v,
                                                          std::uint32_t entry,
                                                          std::size_t ef,
                                                          int layer) const {
  std::vector<std::uint8_t> visited(nodes_.size(), 0);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> frontier;
  std::priority_queue<Candidate> best;  // max-heap: worst kept result on top

  const Candidate start{distance(v, entry), entry};
  visited[entry] = 1;
  frontier.push(start);
  best.push(start);

  while (!frontier.empty()) {
    const Candidate c = frontier.top();
    frontier.pop();
    if (best.size() >= ef && c.dist > best.top().dist) break;

    for (std::uint32_t nb : nodes_[c.node].neighbors[layer]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const double d = distance(v, nb);
      if (best.size() < ef || d < best.top().dist) {
        frontier.push({d, nb});
        best.push({d, nb});
        if (best.size() > ef) best.pop();
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Diversity selection: a candidate is kept only while it is closer to the
// base point than to every already-kept neighbor; spare slots are refilled
// with the nearest rejected candidates. Plain nearest-M clusters the graph
// and ruins recall at scale.
std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates,
                                                       std::uint32_t cap) const {
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> rejected;
  for (const Candidate& c : candidates) {
    if (kept.size() >= cap) break;
    const float* cv = vec(c.node);
    bool shadowed = false;
    for (std::uint32_t s : kept) {
      if (distance(cv, s) < c.dist) {
        shadowed = true;
        break;
      }
    }
    (shadowed ? rejected : kept).push_back(c.node);
  }
  for (std::uint32_t nb : rejected) {
    if (kept.size() >= cap) break;
    kept.push_back(nb);
  }
  return kept;
}

void HnswIndex::prune_neighbors(std::uint32_t node, int layer) {
  auto& list = nodes_[node].neighbors[layer];
  const std::uint32_t cap = params_.max_degree(layer);
  if (list.size() <= cap) return;

  std::vector<Candidate> scored;
  scored.reserve(list.size());
  const float* v = vec(node);
  for (std::uint32_t nb : list) scored.push_back({distance(v, nb), nb});
  list = select_neighbors(std::move(scored), cap);
}

void HnswIndex::insert(const std::string& doc_id, const EmbeddingVector& v) {
  if (id_to_node_.contains(doc_id)) {
    throw std::invalid_argument("duplicate doc_id: " + doc_id);
  }
  if (v.dim() != dim_) {
    throw std::invalid_argument("dimension mismatch for doc_id " + doc_id + ": " +
                                std::to_string(v.dim()) + " vs index dim " +
                                std::to_string(dim_));
  }
  const EmbeddingVector vn = normalize(v);
  const int level = draw_level();

  const auto idx = static_cast<std::uint32_t>(nodes_.size());
  Node node;
  node.id = doc_id;
  node.level = level;
  node.neighbors.resize(static_cast<std::size_t>(level) + 1);
  nodes_.push_back(std::move(node));
  vectors_.insert(vectors_.end(), vn.values.begin(), vn.values.end());
  id_to_node_.emplace(doc_id, idx);

  if (idx == 0) {
    entry_point_ = idx;
    max_level_ = level;
    return;
  }

  const float* q = vec(idx);
  std::uint32_t cur = entry_point_;
  for (int layer = max_level_; layer > level; --layer) {
    cur = greedy_descend(q, cur, layer);
  }

  for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
    auto candidates = search_layer(q, cur, params_.ef_construction, layer);
    cur = candidates.front().node;
    for (std::uint32_t nb : select_neighbors(std::move(candidates), params_.m)) {
      nodes_[idx].neighbors[layer].push_back(nb);
      nodes_[nb].neighbors[layer].push_back(idx);
      prune_neighbors(nb, layer);
    }
  }

  if (level > max_level_) {
    entry_point_ = idx;
    max_level_ = level;
  }
}

SearchResult HnswIndex::search(const EmbeddingVector& q, std::size_t k,
                               std::size_t ef_search) const {
  if (empty()) throw std::domain_error("search on an empty index");
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (ef_search < k) throw std::invalid_argument("ef_search must be at least k");
  if (q.dim() != dim_) {
    throw std::invalid_argument("query dimension " + std::to_string(q.dim()) +
                                " does not match index dim " + std::to_string(dim_));
  }
  const EmbeddingVector qn = normalize(q);

  std::uint32_t cur = entry_point_;
  for (int layer = max_level_; layer > 0; --layer) {
    cur = greedy_descend(qn.values.data(), cur, layer);
  }
  const auto candidates = search_layer(qn.values.data(), cur, ef_search, 0);

  SearchResult result;
  const std::size_t take = std::min(k, candidates.size());
  result.hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const double score = std::clamp(1.0 - candidates[i].dist, -1.0, 1.0);
    result.hits.push_back({nodes_[candidates[i].node].id, score});
  }
  std::sort(result.hits.begin(), result.hits.end(),
            [](const SearchHit& a, const SearchHit& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.doc_id < b.doc_id;
            });
  return result;
}

void HnswIndex::validate() const {
  if (empty()) {
    if (entry_point_ != kNoNode) throw std::logic_error("entry point set on empty index");
    return;
  }
  if (entry_point_ >= nodes_.size()) throw std::logic_error("entry point out of range");
  if (nodes_[entry_point_].level != max_level_) {
    throw std::logic_error("entry point is not at the top level");
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    if (node.level < 0 || node.level > max_level_) {
      throw std::logic_error("node " + node.id + " has level outside [0, max_level]");
    }
    // Presence at every layer up to the node level covers layer nesting and
    // guarantees layer 0 holds everyone.
    if (node.neighbors.size() != static_cast<std::size_t>(node.level) + 1) {
      throw std::logic_error("node " + node.id + " is missing adjacency layers");
    }
    for (int layer = 0; layer <= node.level; ++layer) {
      const auto& list = node.neighbors[layer];
      if (list.size() > params_.max_degree(layer)) {
        throw std::logic_error("node " + node.id + " exceeds the degree bound at layer " +
                               std::to_string(layer));
      }
      for (std::uint32_t nb : list) {
        if (nb >= nodes_.size()) {
          throw std::logic_error("dangling edge from node " + node.id);
        }
        if (nb == i) {
          throw std::logic_error("self edge on node " + node.id);
        }
        if (nodes_[nb].level < layer) {
          throw std::logic_error("edge from node " + node.id + " at layer " +
                                 std::to_string(layer) + " targets a node absent there");
        }
      }
    }
  }
}

HnswIndex::Stats HnswIndex::stats() const {
  Stats s;
  s.nodes = nodes_.size();
  s.max_level = max_level_;
  s.nodes_per_layer.assign(static_cast<std::size_t>(max_level_) + 1, 0);
  std::size_t degree_sum = 0;
  for (const Node& node : nodes_) {
    for (int layer = 0; layer <= node.level && layer <= max_level_; ++layer) {
      ++s.nodes_per_layer[layer];
    }
    if (!node.neighbors.empty()) {
      degree_sum += node.neighbors[0].size();
      s.max_degree_layer0 = std::max(s.max_degree_layer0, node.neighbors[0].size());
    }
  }
  s.mean_degree_layer0 = nodes_.empty() ? 0.0
                                        : static_cast<double>(degree_sum) /
                                              static_cast<double>(nodes_.size());
  return s;
}

}  // namespace relgrade
