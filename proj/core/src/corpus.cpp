#include "relgrade/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "jsonl_util.hpp"
#include "relgrade/errors.hpp"

namespace relgrade {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

Date parse_date_field(const json& j, const char* key, const std::string& file,
                      std::size_t line) {
  const auto s = detail::require_string(j, key, file, line);
  auto d = Date::parse(s);
  if (!d) throw ParseError(file, line, "invalid date \"" + s + "\" (want YYYY-MM-DD)");
  return *d;
}

EmbeddingVector parse_embedding(const json& j, std::size_t expected_dim,
                                const std::string& file, std::size_t line) {
  const auto& arr = detail::require_key(j, "embedding", file, line);
  if (!arr.is_array()) throw ParseError(file, line, "embedding must be an array");
  std::vector<float> values;
  values.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) throw ParseError(file, line, "embedding entries must be numbers");
    values.push_back(x.get<float>());
  }
  if (values.size() != expected_dim) {
    throw ParseError(file, line,
                     "embedding has dimension " + std::to_string(values.size()) +
                         ", corpus dimension is " + std::to_string(expected_dim));
  }
  EmbeddingVector v;
  try {
    v = EmbeddingVector(std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, line, e.what());
  }
  if (norm(v) == 0.0) throw ParseError(file, line, "embedding has zero norm");
  return v;
}

json embedding_to_json(const EmbeddingVector& v) {
  json arr = json::array();
  for (float x : v.values) arr.push_back(static_cast<double>(x));
  return arr;
}

void append_csv_double(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  out += buf;
}

}  // namespace

std::string to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

std::optional<Split> split_from_string(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

std::size_t PairKeyHash::operator()(const PairKey& k) const {
  std::size_t h = std::hash<std::string>{}(k.query_id);
  h ^= std::hash<std::string>{}(k.doc_id) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= std::hash<std::int64_t>{}(k.retrieval_date.serial()) + 0x9e3779b97f4a7c15ull +
       (h << 6) + (h >> 2);
  return h;
}

const std::vector<std::string>& default_fields() {
  static const std::vector<std::string> fields = {
      "Pharmacy",
      "Venture Capital",
      "Information Technology (IT)",
      "Legal",
      "Banking",
      "Healthcare",
      "Automotive",
      "Residential Construction",
  };
  return fields;
}

Corpus::Corpus(std::size_t dim) : dim_(dim), allowed_fields_(default_fields()) {
  if (dim_ == 0) throw std::invalid_argument("corpus dimension must be positive");
}

void Corpus::set_allowed_fields(std::vector<std::string> fields) {
  allowed_fields_ = std::move(fields);
}

const Document* Corpus::find_document(const std::string& doc_id) const {
  auto it = doc_index_.find(doc_id);
  return it == doc_index_.end() ? nullptr : &documents_[it->second];
}

const Query* Corpus::find_query(const std::string& query_id) const {
  auto it = query_index_.find(query_id);
  return it == query_index_.end() ? nullptr : &queries_[it->second];
}

std::optional<std::pair<Date, Date>> Corpus::date_range() const {
  if (documents_.empty()) return std::nullopt;
  Date lo = documents_.front().date;
  Date hi = lo;
  for (const auto& d : documents_) {
    if (d.date < lo) lo = d.date;
    if (hi < d.date) hi = d.date;
  }
  return std::make_pair(lo, hi);
}

void Corpus::add_document(Document doc) {
  if (doc.embedding.dim() != dim_) {
    throw std::invalid_argument("document " + doc.doc_id + " has dimension " +
                                std::to_string(doc.embedding.dim()) + ", corpus uses " +
                                std::to_string(dim_));
  }
  if (norm(doc.embedding) == 0.0) {
    throw std::domain_error("document " + doc.doc_id + " has a zero embedding");
  }
  if (!doc.date.valid()) {
    throw std::invalid_argument("document " + doc.doc_id + " has an invalid date");
  }
  if (doc_index_.contains(doc.doc_id)) {
    throw std::invalid_argument("duplicate doc_id: " + doc.doc_id);
  }
  doc_index_.emplace(doc.doc_id, documents_.size());
  documents_.push_back(std::move(doc));
}

void Corpus::add_query(Query query) {
  if (query.embedding.dim() != dim_) {
    throw std::invalid_argument("query " + query.query_id + " has dimension " +
                                std::to_string(query.embedding.dim()) + ", corpus uses " +
                                std::to_string(dim_));
  }
  if (norm(query.embedding) == 0.0) {
    throw std::domain_error("query " + query.query_id + " has a zero embedding");
  }
  if (!allowed_fields_.empty() &&
      std::find(allowed_fields_.begin(), allowed_fields_.end(), query.field) ==
          allowed_fields_.end()) {
    throw std::invalid_argument("query " + query.query_id + " has unknown field \"" +
                                query.field + "\"");
  }
  if (query_index_.contains(query.query_id)) {
    throw std::invalid_argument("duplicate query_id: " + query.query_id);
  }
  query_index_.emplace(query.query_id, queries_.size());
  queries_.push_back(std::move(query));
}

std::size_t Corpus::ingest_documents(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::vector<Document> batch;
  std::unordered_set<std::string> batch_ids;

  detail::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    Document doc;
    doc.doc_id = detail::require_string(j, "doc_id", file, line);
    doc.date = parse_date_field(j, "date", file, line);
    doc.source = detail::require_string(j, "source", file, line);
    if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(file, line, "text must be a string");
      doc.text = it->get<std::string>();
    }
    doc.embedding = parse_embedding(j, dim_, file, line);
    if (doc_index_.contains(doc.doc_id) || !batch_ids.insert(doc.doc_id).second) {
      throw ParseError(file, line, "duplicate doc_id: " + doc.doc_id);
    }
    batch.push_back(std::move(doc));
  });

  for (auto& doc : batch) {
    doc_index_.emplace(doc.doc_id, documents_.size());
    documents_.push_back(std::move(doc));
  }
  return batch.size();
}

std::size_t Corpus::ingest_queries(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::vector<Query> batch;
  std::unordered_set<std::string> batch_ids;

  detail::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    Query query;
    query.query_id = detail::require_string(j, "query_id", file, line);
    query.field = detail::require_string(j, "field", file, line);
    query.category = detail::require_string(j, "category", file, line);
    query.text = detail::require_string(j, "text", file, line);
    query.embedding = parse_embedding(j, dim_, file, line);
    if (!allowed_fields_.empty() &&
        std::find(allowed_fields_.begin(), allowed_fields_.end(), query.field) ==
            allowed_fields_.end()) {
      throw ParseError(file, line, "unknown field \"" + query.field + "\"");
    }
    if (query_index_.contains(query.query_id) || !batch_ids.insert(query.query_id).second) {
      throw ParseError(file, line, "duplicate query_id: " + query.query_id);
    }
    batch.push_back(std::move(query));
  });

  for (auto& query : batch) {
    query_index_.emplace(query.query_id, queries_.size());
    queries_.push_back(std::move(query));
  }
  return batch.size();
}

PairGenResult generate_pairs(const Corpus& corpus, const PairGenConfig& config) {
  if (config.k == 0) throw std::invalid_argument("k must be positive");
  if (config.window_end < config.window_start) {
    throw std::invalid_argument("empty date window: " + config.window_start.to_string() +
                                " .. " + config.window_end.to_string());
  }
  if (corpus.queries().empty()) throw std::domain_error("corpus has no queries");

  std::vector<const Document*> docs;
  docs.reserve(corpus.documents().size());
  for (const auto& d : corpus.documents()) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(), [](const Document* a, const Document* b) {
    if (a->date != b->date) return a->date < b->date;
    return a->doc_id < b->doc_id;
  });
  if (docs.empty() || config.window_end < docs.front()->date) {
    throw std::domain_error("no documents are eligible inside the date window");
  }

  std::vector<const Query*> queries;
  queries.reserve(corpus.queries().size());
  for (const auto& q : corpus.queries()) queries.push_back(&q);
  std::sort(queries.begin(), queries.end(),
            [](const Query* a, const Query* b) { return a->query_id < b->query_id; });

  std::optional<BruteForceIndex> bf;
  std::optional<HnswIndex> hnsw;
  if (config.engine == IndexEngine::kBruteForce) {
    bf.emplace(corpus.dim());
  } else {
    hnsw.emplace(corpus.dim(), config.hnsw);
  }
  const std::size_t ef = std::max(config.ef_search, config.k);

  PairGenResult result;
  std::unordered_set<std::string> seen;  // dedupe key: query_id \x1f doc_id
  std::size_t next_doc = 0;
  std::size_t indexed = 0;

  for (auto serial = config.window_start.serial(); serial <= config.window_end.serial();
       ++serial) {
    const Date day = Date::from_serial(serial);
    while (next_doc < docs.size() && docs[next_doc]->date <= day) {
      if (bf) {
        bf->insert(docs[next_doc]->doc_id, docs[next_doc]->embedding);
      } else {
        hnsw->insert(docs[next_doc]->doc_id, docs[next_doc]->embedding);
      }
      ++indexed;
      ++next_doc;
    }
    if (indexed == 0) {
      ++result.dates_without_documents;
      continue;
    }
    ++result.dates_searched;

    for (const Query* q : queries) {
      const SearchResult hits = bf ? bf->search(q->embedding, config.k)
                                   : hnsw->search(q->embedding, config.k, ef);
      std::uint32_t rank = 0;
      for (const SearchHit& hit : hits.hits) {
        ++rank;
        if (config.dedupe && !seen.insert(q->query_id + '\x1f' + hit.doc_id).second) {
          ++result.deduped;
          continue;
        }
        const Document* doc = corpus.find_document(hit.doc_id);
        result.pairs.push_back(PairRecord{
            q->query_id, hit.doc_id, day, rank,
            cosine_similarity(q->embedding, doc->embedding), std::nullopt, std::nullopt});
      }
    }
  }
  return result;
}

std::vector<HistogramBin> similarity_histogram(const std::vector<PairRecord>& pairs,
                                               std::size_t bins, bool by_label) {
  if (pairs.empty()) throw std::invalid_argument("no pairs to histogram");
  if (bins == 0) throw std::invalid_argument("bins must be positive");
  if (by_label) {
    for (const auto& p : pairs) {
      if (!p.label) {
        throw std::invalid_argument("pair (" + p.query_id + ", " + p.doc_id +
                                    ") is unlabeled; by-label histogram needs labels");
      }
    }
  }

  double lo = pairs.front().cosine;
  double hi = lo;
  for (const auto& p : pairs) {
    lo = std::min(lo, p.cosine);
    hi = std::max(hi, p.cosine);
  }
  const double width = (hi - lo) / static_cast<double>(bins);

  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (const auto& p : pairs) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = std::min(bins - 1,
                   static_cast<std::size_t>((p.cosine - lo) / width));
    }
    ++out[b].total;
    if (by_label) {
      if (*p.label) {
        ++out[b].positive;
      } else {
        ++out[b].negative;
      }
    }
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_lo,bin_hi,count_total,count_positive,count_negative\n";
  for (const auto& b : bins) {
    append_csv_double(out, b.lo);
    out += ',';
    append_csv_double(out, b.hi);
    out += ',' + std::to_string(b.total) + ',' + std::to_string(b.positive) + ',' +
           std::to_string(b.negative) + '\n';
  }
  return out;
}

double positive_rate(const std::vector<PairRecord>& pairs) {
  std::size_t labeled = 0;
  std::size_t positives = 0;
  for (const auto& p : pairs) {
    if (!p.label) continue;
    ++labeled;
    if (*p.label) ++positives;
  }
  if (labeled == 0) throw std::invalid_argument("no labeled pairs");
  return static_cast<double>(positives) / static_cast<double>(labeled);
}

void write_documents_jsonl(const std::filesystem::path& path,
                           const std::vector<Document>& docs) {
  auto out = detail::open_output(path);
  for (const auto& d : docs) {
    ordered_json j;
    j["doc_id"] = d.doc_id;
    j["date"] = d.date.to_string();
    j["source"] = d.source;
    if (d.text) j["text"] = *d.text;
    j["embedding"] = embedding_to_json(d.embedding);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_queries_jsonl(const std::filesystem::path& path,
                         const std::vector<Query>& queries) {
  auto out = detail::open_output(path);
  for (const auto& q : queries) {
    ordered_json j;
    j["query_id"] = q.query_id;
    j["field"] = q.field;
    j["category"] = q.category;
    j["text"] = q.text;
    j["embedding"] = embedding_to_json(q.embedding);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_pairs_jsonl(const std::filesystem::path& path,
                       const std::vector<PairRecord>& pairs) {
  auto out = detail::open_output(path);
  for (const auto& p : pairs) {
    ordered_json j;
    j["query_id"] = p.query_id;
    j["doc_id"] = p.doc_id;
    j["retrieval_date"] = p.retrieval_date.to_string();
    j["rank"] = p.rank;
    j["cosine"] = p.cosine;
    if (p.label) j["label"] = *p.label;
    if (p.split) j["split"] = to_string(*p.split);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::vector<PairRecord> pairs;
  std::unordered_set<std::string> keys;

  detail::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    PairRecord p;
    p.query_id = detail::require_string(j, "query_id", file, line);
    p.doc_id = detail::require_string(j, "doc_id", file, line);
    p.retrieval_date = parse_date_field(j, "retrieval_date", file, line);

    const auto& rank = detail::require_key(j, "rank", file, line);
    if (!rank.is_number_unsigned() || rank.get<std::uint64_t>() == 0) {
      throw ParseError(file, line, "rank must be a positive integer");
    }
    p.rank = rank.get<std::uint32_t>();

    const auto& cosine = detail::require_key(j, "cosine", file, line);
    if (!cosine.is_number()) throw ParseError(file, line, "cosine must be a number");
    p.cosine = cosine.get<double>();
    if (p.cosine < -1.0 || p.cosine > 1.0) {
      throw ParseError(file, line, "cosine outside [-1, 1]");
    }

    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      if (!it->is_boolean()) throw ParseError(file, line, "label must be a boolean");
      p.label = it->get<bool>();
    }
    if (auto it = j.find("split"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(file, line, "split must be a string");
      auto s = split_from_string(it->get<std::string>());
      if (!s) throw ParseError(file, line, "split must be \"train\" or \"test\"");
      p.split = *s;
    }

    const std::string key =
        p.query_id + '\x1f' + p.doc_id + '\x1f' + p.retrieval_date.to_string();
    if (!keys.insert(key).second) {
      throw ParseError(file, line, "duplicate pair key (" + p.query_id + ", " + p.doc_id +
                                       ", " + p.retrieval_date.to_string() + ")");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

}  // namespace relgrade
