#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relgrade/corpus.hpp"
#include "relgrade/training.hpp"

namespace relgrade {

/// One grader's call on one pair. relevant == nullopt marks a pair the
/// grader could not label (judge failure after retries); raw carries the
/// provenance (judge reply, threshold, or logit pair).
struct GraderVerdict {
  PairKey key;
  std::optional<bool> relevant;
  std::string raw;
};

/// relevant = (cosine >= t); the boundary is inclusive.
std::vector<GraderVerdict> grade_with_threshold(const std::vector<PairRecord>& pairs,
                                                double t);

/// argmax over the head's two logits; an exact tie resolves to not-relevant.
bool head_predicts_relevant(const ClassifierHead& head,
                            std::span<const float> features);

/// Throws std::invalid_argument when a feature vector does not match the
/// head dimension.
std::vector<GraderVerdict> grade_with_head(const std::vector<PairRecord>& pairs,
                                           const ClassifierHead& head,
                                           const FeatureSource& features);

struct GoldEntry {
  std::string query_id;
  std::string doc_id;
  std::optional<Date> retrieval_date;  // absent = matches every date
  bool label = false;
};

struct GoldLoadStats {
  std::size_t entries = 0;
  std::size_t labeled = 0;    // pairs that received a label
  std::size_t unmatched = 0;  // gold entries matching no pair
  std::size_t unlabeled = 0;  // pairs left without a label
};

/// Attaches gold labels to pairs in place. Exact (query, doc, date) entries
/// win over dateless (query, doc) entries. Duplicate keys in the file are an
/// error. Throws IoError / ParseError for file problems.
GoldLoadStats load_gold_labels(const std::filesystem::path& path,
                               std::vector<PairRecord>& pairs);

void write_gold_jsonl(const std::filesystem::path& path,
                      const std::vector<GoldEntry>& entries);

/// Verdicts JSONL: {query_id, doc_id, retrieval_date, label, raw}; label is
/// null for ungraded pairs.
void write_verdicts_jsonl(const std::filesystem::path& path,
                          const std::vector<GraderVerdict>& verdicts);
std::vector<GraderVerdict> read_verdicts_jsonl(const std::filesystem::path& path);

// ---- remote judge -------------------------------------------------------

struct JudgeConfig {
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model = "relevance-judge";
  std::string system_prompt;  // default_judge_prompt() when empty
  int timeout_ms = 30000;
  int max_retries = 2;       // additional attempts after the first
  int parallelism = 4;       // concurrent in-flight requests
  std::string auth_token;    // from RELGRADE_JUDGE_TOKEN, never a flag
};

std::string default_judge_prompt();

/// Reads RELGRADE_JUDGE_TOKEN into auth_token; leaves it empty when unset.
void load_judge_token_from_env(JudgeConfig& config);

/// DOCUMENTS / QUESTION message for one pair. Exposed for tests.
std::string build_judge_user_message(const std::string& document_text,
                                     const std::string& query_text);

/// VERDICT-line contract: a "VERDICT: RELEVANT" / "VERDICT: NOT RELEVANT"
/// line (case-insensitive) decides; otherwise a whole-reply keyword match;
/// otherwise nullopt (unparseable).
std::optional<bool> parse_judge_reply(const std::string& reply);

/// Grades every pair against the chat endpoint. Requires query and document
/// text for every pair (std::invalid_argument otherwise). Verdicts come
/// back in input order; a pair whose request keeps failing after retries is
/// returned ungraded with the error in raw.
std::vector<GraderVerdict> grade_with_judge(const std::vector<PairRecord>& pairs,
                                            const Corpus& corpus,
                                            const JudgeConfig& config);

}  // namespace relgrade
