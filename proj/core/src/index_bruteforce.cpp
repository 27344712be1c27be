#include <algorithm>
#include <stdexcept>

#include "relgrade/index.hpp"

namespace relgrade {

void BruteForceIndex::insert(const std::string& doc_id, const EmbeddingVector& v) {
  if (id_to_entry_.contains(doc_id)) {
    throw std::invalid_argument("duplicate doc_id: " + doc_id);
  }
  if (dim_ == 0) {
    dim_ = v.dim();
  } else if (v.dim() != dim_) {
    throw std::invalid_argument("dimension mismatch for doc_id " + doc_id + ": " +
                                std::to_string(v.dim()) + " vs index dim " +
                                std::to_string(dim_));
  }
  const EmbeddingVector vn = normalize(v);
  id_to_entry_.emplace(doc_id, static_cast<std::uint32_t>(ids_.size()));
  ids_.push_back(doc_id);
  normalized_.insert(normalized_.end(), vn.values.begin(), vn.values.end());
}

SearchResult BruteForceIndex::search(const EmbeddingVector& q, std::size_t k) const {
  if (empty()) throw std::domain_error("search on an empty index");
  if (k == 0) throw std::invalid_argument("k must be positive");
  const EmbeddingVector qn = normalize(q);
  if (qn.dim() != dim_) {
    throw std::invalid_argument("query dimension " + std::to_string(qn.dim()) +
                                " does not match index dim " + std::to_string(dim_));
  }

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const float* row = normalized_.data() + i * dim_;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      acc += static_cast<double>(qn.values[j]) * static_cast<double>(row[j]);
    }
    scored.emplace_back(std::clamp(acc, -1.0, 1.0), i);
  }

  const auto better = [this](const std::pair<double, std::size_t>& a,
                             const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return ids_[a.second] < ids_[b.second];  // ties by ascending doc_id
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), better);

  SearchResult result;
  result.hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    result.hits.push_back({ids_[scored[i].second], scored[i].first});
  }
  return result;
}

double recall_at_k(const SearchResult& approx, const SearchResult& exact, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (exact.hits.size() < k) {
    throw std::invalid_argument("exact result has fewer than k hits");
  }
  std::vector<std::string> exact_ids;
  exact_ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) exact_ids.push_back(exact.hits[i].doc_id);
  std::sort(exact_ids.begin(), exact_ids.end());

  std::size_t found = 0;
  const std::size_t take = std::min(k, approx.hits.size());
  for (std::size_t i = 0; i < take; ++i) {
    found += std::binary_search(exact_ids.begin(), exact_ids.end(), approx.hits[i].doc_id);
  }
  return static_cast<double>(found) / static_cast<double>(k);
}

}  // namespace relgrade
