#include "relgrade/grading.hpp"

#include <cstdio>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "jsonl_util.hpp"
#include "relgrade/errors.hpp"

namespace relgrade {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string exact_key(const std::string& query_id, const std::string& doc_id,
                      const Date& date) {
  return query_id + '\x1f' + doc_id + '\x1f' + date.to_string();
}

std::string wildcard_key(const std::string& query_id, const std::string& doc_id) {
  return query_id + '\x1f' + doc_id;
}

}  // namespace

std::vector<GraderVerdict> grade_with_threshold(const std::vector<PairRecord>& pairs,
                                                double t) {
  std::vector<GraderVerdict> verdicts;
  verdicts.reserve(pairs.size());
  char raw[64];
  for (const auto& p : pairs) {
    std::snprintf(raw, sizeof(raw), "cosine=%.6f threshold=%.6f", p.cosine, t);
    verdicts.push_back(GraderVerdict{p.key(), p.cosine >= t, raw});
  }
  return verdicts;
}

bool head_predicts_relevant(const ClassifierHead& head,
                            std::span<const float> features) {
  const auto logits = head.logits(features);
  return logits[1] > logits[0];
}

std::vector<GraderVerdict> grade_with_head(const std::vector<PairRecord>& pairs,
                                           const ClassifierHead& head,
                                           const FeatureSource& features) {
  std::vector<GraderVerdict> verdicts;
  verdicts.reserve(pairs.size());
  char raw[64];
  for (const auto& p : pairs) {
    const auto x = features(p);
    const auto logits = head.logits(x);
    std::snprintf(raw, sizeof(raw), "logits=(%.6f, %.6f)", logits[0], logits[1]);
    verdicts.push_back(GraderVerdict{p.key(), logits[1] > logits[0], raw});
  }
  return verdicts;
}

GoldLoadStats load_gold_labels(const std::filesystem::path& path,
                               std::vector<PairRecord>& pairs) {
  const std::string file = path.string();

  struct Entry {
    bool label;
    bool matched = false;
  };
  std::vector<Entry> entries;
  std::unordered_map<std::string, std::size_t> exact;
  std::unordered_map<std::string, std::size_t> wildcard;

  detail::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    const auto query_id = detail::require_string(j, "query_id", file, line);
    const auto doc_id = detail::require_string(j, "doc_id", file, line);
    const auto& label = detail::require_key(j, "label", file, line);
    if (!label.is_boolean()) throw ParseError(file, line, "label must be a boolean");

    std::optional<Date> date;
    if (auto it = j.find("retrieval_date"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(file, line, "retrieval_date must be a string");
      date = Date::parse(it->get<std::string>());
      if (!date) throw ParseError(file, line, "invalid retrieval_date");
    }

    const std::size_t idx = entries.size();
    const bool inserted =
        date ? exact.emplace(exact_key(query_id, doc_id, *date), idx).second
             : wildcard.emplace(wildcard_key(query_id, doc_id), idx).second;
    if (!inserted) {
      throw ParseError(file, line, "duplicate gold key (" + query_id + ", " + doc_id +
                                       (date ? ", " + date->to_string() : "") + ")");
    }
    entries.push_back({label.get<bool>(), false});
  });

  GoldLoadStats stats;
  stats.entries = entries.size();
  for (auto& p : pairs) {
    std::size_t idx;
    if (auto it = exact.find(exact_key(p.query_id, p.doc_id, p.retrieval_date));
        it != exact.end()) {
      idx = it->second;
    } else if (auto wit = wildcard.find(wildcard_key(p.query_id, p.doc_id));
               wit != wildcard.end()) {
      idx = wit->second;
    } else {
      ++stats.unlabeled;
      continue;
    }
    p.label = entries[idx].label;
    entries[idx].matched = true;
    ++stats.labeled;
  }
  for (const auto& e : entries) {
    if (!e.matched) ++stats.unmatched;
  }
  return stats;
}

void write_gold_jsonl(const std::filesystem::path& path,
                      const std::vector<GoldEntry>& entries) {
  auto out = detail::open_output(path);
  for (const auto& e : entries) {
    ordered_json j;
    j["query_id"] = e.query_id;
    j["doc_id"] = e.doc_id;
    if (e.retrieval_date) j["retrieval_date"] = e.retrieval_date->to_string();
    j["label"] = e.label;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_verdicts_jsonl(const std::filesystem::path& path,
                          const std::vector<GraderVerdict>& verdicts) {
  auto out = detail::open_output(path);
  for (const auto& v : verdicts) {
    ordered_json j;
    j["query_id"] = v.key.query_id;
    j["doc_id"] = v.key.doc_id;
    j["retrieval_date"] = v.key.retrieval_date.to_string();
    if (v.relevant) {
      j["label"] = *v.relevant;
    } else {
      j["label"] = nullptr;
    }
    j["raw"] = v.raw;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<GraderVerdict> read_verdicts_jsonl(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::vector<GraderVerdict> verdicts;
  std::unordered_set<std::string> keys;

  detail::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    GraderVerdict v;
    v.key.query_id = detail::require_string(j, "query_id", file, line);
    v.key.doc_id = detail::require_string(j, "doc_id", file, line);
    const auto date_str = detail::require_string(j, "retrieval_date", file, line);
    auto date = Date::parse(date_str);
    if (!date) throw ParseError(file, line, "invalid retrieval_date");
    v.key.retrieval_date = *date;

    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      if (!it->is_boolean()) throw ParseError(file, line, "label must be a boolean");
      v.relevant = it->get<bool>();
    }
    if (auto it = j.find("raw"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(file, line, "raw must be a string");
      v.raw = it->get<std::string>();
    }

    if (!keys.insert(exact_key(v.key.query_id, v.key.doc_id, v.key.retrieval_date))
             .second) {
      throw ParseError(file, line, "duplicate verdict for (" + v.key.query_id + ", " +
                                       v.key.doc_id + ", " + date_str + ")");
    }
    verdicts.push_back(std::move(v));
  });
  return verdicts;
}

}  // namespace relgrade
