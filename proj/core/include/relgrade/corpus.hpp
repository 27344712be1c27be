#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relgrade/date.hpp"
#include "relgrade/index.hpp"
#include "relgrade/vectormath.hpp"

namespace relgrade {

struct Document {
  std::string doc_id;
  Date date;
  std::string source;
  std::optional<std::string> text;  // optional: embedding-only corpora stay useful
  EmbeddingVector embedding;
};

struct Query {
  std::string query_id;
  std::string field;
  std::string category;
  std::string text;
  EmbeddingVector embedding;
};

enum class Split { kTrain, kTest };

std::string to_string(Split s);
std::optional<Split> split_from_string(std::string_view s);

struct PairKey {
  std::string query_id;
  std::string doc_id;
  Date retrieval_date;

  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const;
};

/// One (query, document) retrieval event: the dataset atom.
struct PairRecord {
  std::string query_id;
  std::string doc_id;
  Date retrieval_date;
  std::uint32_t rank = 0;  // 1-based within that day's top-k
  double cosine = 0.0;
  std::optional<bool> label;
  std::optional<Split> split;

  PairKey key() const { return {query_id, doc_id, retrieval_date}; }
};

/// The default allowed values for Query::field.
const std::vector<std::string>& default_fields();

/// In-memory document and query store with JSONL ingest.
class Corpus {
 public:
  explicit Corpus(std::size_t dim = 384);

  /// Atomic: either every line is ingested or none is. Returns the number of
  /// records added. Throws IoError if the file cannot be read, ParseError
  /// (with file:line) on a malformed line, wrong dimension, zero embedding,
  /// or duplicate id.
  std::size_t ingest_documents(const std::filesystem::path& path);
  std::size_t ingest_queries(const std::filesystem::path& path);

  /// Programmatic inserts (generators, tests). Same validation as ingest but
  /// errors are plain std::invalid_argument / std::domain_error.
  void add_document(Document doc);
  void add_query(Query query);

  /// Replaces the allowed Query::field values; empty list disables the check.
  void set_allowed_fields(std::vector<std::string> fields);

  std::size_t dim() const { return dim_; }
  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<Query>& queries() const { return queries_; }
  const Document* find_document(const std::string& doc_id) const;
  const Query* find_query(const std::string& query_id) const;

  /// Earliest and latest document date; nullopt when no documents.
  std::optional<std::pair<Date, Date>> date_range() const;

 private:
  std::size_t dim_;
  std::vector<std::string> allowed_fields_;
  std::vector<Document> documents_;
  std::vector<Query> queries_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::unordered_map<std::string, std::size_t> query_index_;
};

enum class IndexEngine { kBruteForce, kHnsw };

struct PairGenConfig {
  Date window_start;
  Date window_end;
  std::size_t k = 5;
  IndexEngine engine = IndexEngine::kHnsw;
  HnswParams hnsw;                // hnsw engine only; seed lives here
  std::size_t ef_search = 100;    // clamped up to k
  bool dedupe = false;            // drop repeats of (query, doc) on later dates
};

struct PairGenResult {
  std::vector<PairRecord> pairs;  // canonical order: (date, query_id, rank)
  std::size_t dates_searched = 0;
  std::size_t dates_without_documents = 0;
  std::size_t deduped = 0;
};

/// Replays the daily protocol: for every date D in the window, search the
/// index over documents dated <= D with every query, emit the top-k with
/// rank and recomputed cosine. Deterministic for a fixed corpus and config.
/// Throws std::invalid_argument on an empty window or k == 0,
/// std::domain_error if no document falls inside the window.
PairGenResult generate_pairs(const Corpus& corpus, const PairGenConfig& config);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t total = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

/// Equal-width bins over [min, max] of the pair cosines; the max value lands
/// in the last bin. With by_label, every pair must be labeled and the
/// per-label columns are filled. Throws std::invalid_argument on empty
/// input, bins == 0, or unlabeled pairs under by_label.
std::vector<HistogramBin> similarity_histogram(const std::vector<PairRecord>& pairs,
                                               std::size_t bins, bool by_label);

/// CSV with header bin_lo,bin_hi,count_total,count_positive,count_negative.
std::string histogram_csv(const std::vector<HistogramBin>& bins);

/// Fraction of labeled pairs that are positive. Throws std::invalid_argument
/// if no pair is labeled.
double positive_rate(const std::vector<PairRecord>& pairs);

// JSONL round trip. Writers throw IoError; readers throw IoError on a
// missing file and ParseError (file:line) on malformed content.
void write_documents_jsonl(const std::filesystem::path& path,
                           const std::vector<Document>& docs);
void write_queries_jsonl(const std::filesystem::path& path,
                         const std::vector<Query>& queries);
void write_pairs_jsonl(const std::filesystem::path& path,
                       const std::vector<PairRecord>& pairs);
std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path);

}  // namespace relgrade
