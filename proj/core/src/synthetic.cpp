#include "relgrade/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "relgrade/random.hpp"
#include "relgrade/vectormath.hpp"

namespace relgrade {

namespace {

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05zu", prefix, i);
  return buf;
}

EmbeddingVector random_unit(std::size_t dim, std::mt19937_64& eng) {
  for (;;) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(rng::normal(eng));
    EmbeddingVector e(std::move(v));
    if (norm(e) > 1e-6) return normalize(e);
  }
}

/// Unit vector at exact cosine c to the unit direction u (up to float
/// rounding): c*u + sqrt(1-c^2)*w with w a random unit vector orthogonal
/// to u.
EmbeddingVector at_cosine(const EmbeddingVector& u, double c, std::mt19937_64& eng) {
  const std::size_t dim = u.dim();
  for (;;) {
    std::vector<double> w(dim);
    for (auto& x : w) x = rng::normal(eng);
    double proj = 0.0;
    for (std::size_t i = 0; i < dim; ++i) proj += w[i] * u.values[i];
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      w[i] -= proj * u.values[i];
      norm_sq += w[i] * w[i];
    }
    if (norm_sq < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(norm_sq);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = static_cast<float>(c * u.values[i] + s * inv * w[i]);
    }
    return normalize(EmbeddingVector(std::move(v)));
  }
}

double clamp_cosine(double c) { return std::clamp(c, -0.999, 0.999); }

}  // namespace

void SyntheticSpec::validate() const {
  if (dim < 2) throw std::invalid_argument("dim must be >= 2");
  if (n_documents < 1) throw std::invalid_argument("n_documents must be >= 1");
  if (n_queries < 1) throw std::invalid_argument("n_queries must be >= 1");
  if (!(positive_rate > 0.0 && positive_rate < 1.0)) {
    throw std::invalid_argument("positive_rate must be strictly inside (0, 1)");
  }
  if (!(noise_scale > 0.0)) throw std::invalid_argument("noise_scale must be positive");
  if (!(band_lo > 0.0 && band_hi < 1.0 && band_lo <= band_hi)) {
    throw std::invalid_argument("positive band must satisfy 0 < band_lo <= band_hi < 1");
  }
  if (!(separation > 0.0 && separation < band_lo)) {
    throw std::invalid_argument("separation must be in (0, band_lo)");
  }
  if (!(mid_fraction >= 0.0 && mid_fraction <= 1.0)) {
    throw std::invalid_argument("mid_fraction must be in [0, 1]");
  }
  if (pairs_per_query_date < 1) {
    throw std::invalid_argument("pairs_per_query_date must be >= 1");
  }
}

SyntheticDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 eng(spec.seed);
  const Date base = *Date::parse("2025-01-01");

  SyntheticDataset out;

  const auto& fields = default_fields();
  std::vector<EmbeddingVector> directions;
  std::vector<double> band_center;
  directions.reserve(spec.n_queries);
  band_center.reserve(spec.n_queries);
  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    Query query;
    query.query_id = padded_id("sq", q);
    query.field = fields[q % fields.size()];
    query.category = "synthetic";
    query.text = "synthetic probe " + std::to_string(q);
    query.embedding = random_unit(spec.dim, eng);
    directions.push_back(query.embedding);
    band_center.push_back(rng::uniform(eng, spec.band_lo, spec.band_hi));
    out.queries.push_back(std::move(query));
  }

  const auto n_positive =
      static_cast<std::size_t>(std::llround(spec.positive_rate *
                                            static_cast<double>(spec.n_documents)));
  std::vector<char> is_positive(spec.n_documents, 0);
  std::fill(is_positive.begin(),
            is_positive.begin() + static_cast<std::ptrdiff_t>(
                                      std::min(n_positive, spec.n_documents)),
            1);
  rng::shuffle(is_positive, eng);

  const std::size_t per_date = spec.n_queries * spec.pairs_per_query_date;
  out.documents.reserve(spec.n_documents);
  out.pairs.reserve(spec.n_documents);
  for (std::size_t i = 0; i < spec.n_documents; ++i) {
    const std::size_t q = (i / spec.pairs_per_query_date) % spec.n_queries;
    const Date date = Date::from_serial(base.serial() +
                                        static_cast<std::int64_t>(i / per_date));

    double c;
    if (is_positive[i]) {
      c = clamp_cosine(band_center[q] + spec.noise_scale * rng::normal(eng));
    } else if (rng::u01(eng) < spec.mid_fraction) {
      const double mid = band_center[q] - spec.separation - rng::uniform(eng, 0.0, 0.10);
      c = clamp_cosine(mid + spec.noise_scale * rng::normal(eng));
    } else {
      c = 2.0;  // sentinel: uniform sphere, no planted cosine
    }

    Document doc;
    doc.doc_id = padded_id("sd", i);
    doc.date = date;
    doc.source = "synthetic";
    doc.embedding = c > 1.0 ? random_unit(spec.dim, eng)
                            : at_cosine(directions[q], c, eng);

    PairRecord pair;
    pair.query_id = out.queries[q].query_id;
    pair.doc_id = doc.doc_id;
    pair.retrieval_date = date;
    pair.cosine = cosine_similarity(out.queries[q].embedding, doc.embedding);
    pair.label = static_cast<bool>(is_positive[i]);

    out.documents.push_back(std::move(doc));
    out.pairs.push_back(std::move(pair));
  }

  // Ranks: descending cosine within each (query, date) group. Groups are
  // contiguous runs of pairs_per_query_date documents by construction.
  for (std::size_t start = 0; start < out.pairs.size();
       start += spec.pairs_per_query_date) {
    const std::size_t end =
        std::min(start + spec.pairs_per_query_date, out.pairs.size());
    std::vector<std::size_t> order;
    for (std::size_t i = start; i < end; ++i) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (out.pairs[a].cosine != out.pairs[b].cosine) {
        return out.pairs[a].cosine > out.pairs[b].cosine;
      }
      return out.pairs[a].doc_id < out.pairs[b].doc_id;
    });
    for (std::size_t r = 0; r < order.size(); ++r) {
      out.pairs[order[r]].rank = static_cast<std::uint32_t>(r + 1);
    }
  }

  out.gold.reserve(out.pairs.size());
  for (const auto& p : out.pairs) {
    out.gold.push_back(GoldEntry{p.query_id, p.doc_id, p.retrieval_date, *p.label});
  }
  return out;
}

std::vector<GoldEntry> cross_gold(const SyntheticDataset& dataset) {
  std::vector<GoldEntry> gold;
  gold.reserve(dataset.queries.size() * dataset.documents.size());

  std::unordered_map<std::string, std::size_t> positive_query;  // doc -> query idx
  std::unordered_map<std::string, std::size_t> query_index;
  for (std::size_t q = 0; q < dataset.queries.size(); ++q) {
    query_index[dataset.queries[q].query_id] = q;
  }
  for (const auto& p : dataset.pairs) {
    if (p.label && *p.label) positive_query[p.doc_id] = query_index.at(p.query_id);
  }

  for (std::size_t q = 0; q < dataset.queries.size(); ++q) {
    for (const auto& doc : dataset.documents) {
      const auto it = positive_query.find(doc.doc_id);
      const bool label = it != positive_query.end() && it->second == q;
      gold.push_back(GoldEntry{dataset.queries[q].query_id, doc.doc_id, std::nullopt,
                               label});
    }
  }
  return gold;
}

}  // namespace relgrade
