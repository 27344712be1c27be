#include "relgrade/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "relgrade/grading.hpp"

namespace relgrade {

namespace {

constexpr const char* kDash = "—";

std::string key_string(const PairKey& k) {
  return k.query_id + '\x1f' + k.doc_id + '\x1f' + k.retrieval_date.to_string();
}

std::string format_metric(const std::optional<double>& m) {
  if (!m) return "";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.4f", *m);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  const std::size_t visible = s == kDash ? 1 : s.size();
  if (visible >= width) return s;
  return std::string(width - visible, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return s + std::string(width - s.size(), ' ');
}

}  // namespace

MetricsRow metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::domain_error("empty confusion matrix");
  MetricsRow row;
  row.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fp > 0) {
    row.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn > 0) {
    row.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  if (row.precision && row.recall && *row.precision > 0.0 && *row.recall > 0.0) {
    row.f1 = 2.0 * *row.precision * *row.recall / (*row.precision + *row.recall);
  }
  return row;
}

ConfusionMatrix confusion(const std::vector<GraderVerdict>& verdicts,
                          const std::vector<PairRecord>& truth,
                          std::size_t* ungraded) {
  std::unordered_map<std::string, bool> labels;
  labels.reserve(truth.size());
  for (const auto& p : truth) {
    if (!p.label) continue;
    if (!labels.emplace(key_string(p.key()), *p.label).second) {
      throw std::invalid_argument("duplicate truth pair (" + p.query_id + ", " +
                                  p.doc_id + ", " + p.retrieval_date.to_string() + ")");
    }
  }

  ConfusionMatrix cm;
  std::size_t skipped = 0;
  for (const auto& v : verdicts) {
    if (!v.relevant) {
      ++skipped;
      continue;
    }
    auto it = labels.find(key_string(v.key));
    if (it == labels.end()) {
      throw std::invalid_argument("no truth label for pair (" + v.key.query_id + ", " +
                                  v.key.doc_id + ", " +
                                  v.key.retrieval_date.to_string() + ")");
    }
    const bool predicted = *v.relevant;
    const bool actual = it->second;
    if (predicted && actual) {
      ++cm.tp;
    } else if (predicted) {
      ++cm.fp;
    } else if (actual) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  if (ungraded) *ungraded = skipped;
  return cm;
}

ScoredGrader score_grader(const std::string& name,
                          const std::vector<GraderVerdict>& verdicts,
                          const std::vector<PairRecord>& truth) {
  ScoredGrader out;
  out.name = name;
  out.matrix = confusion(verdicts, truth, &out.ungraded);
  out.row = metrics(out.matrix);
  out.row.model = name;
  return out;
}

std::vector<ScoredGrader> compare(
    const std::vector<std::pair<std::string, std::vector<GraderVerdict>>>& graders,
    const std::vector<PairRecord>& truth) {
  if (graders.empty()) throw std::invalid_argument("no graders to compare");

  std::vector<std::string> reference;
  for (std::size_t i = 0; i < graders.size(); ++i) {
    std::vector<std::string> keys;
    keys.reserve(graders[i].second.size());
    for (const auto& v : graders[i].second) keys.push_back(key_string(v.key));
    std::sort(keys.begin(), keys.end());
    if (i == 0) {
      reference = std::move(keys);
    } else if (keys != reference) {
      throw std::invalid_argument("grader \"" + graders[i].first +
                                  "\" covers a different pair set than \"" +
                                  graders[0].first + "\"");
    }
  }

  std::vector<ScoredGrader> rows;
  rows.reserve(graders.size());
  for (const auto& [name, verdicts] : graders) {
    rows.push_back(score_grader(name, verdicts, truth));
  }
  return rows;
}

std::string report_csv(const std::vector<ScoredGrader>& rows) {
  std::string out = "model,accuracy,precision,recall,f1,ungraded\n";
  for (const auto& r : rows) {
    out += r.name + ',' + format_metric(r.row.accuracy) + ',' +
           format_metric(r.row.precision) + ',' + format_metric(r.row.recall) + ',' +
           format_metric(r.row.f1) + ',' + std::to_string(r.ungraded) + '\n';
  }
  return out;
}

std::string report_text(const std::vector<ScoredGrader>& rows) {
  std::size_t name_width = 5;  // "model"
  for (const auto& r : rows) name_width = std::max(name_width, r.name.size());

  auto cell = [](const std::optional<double>& m) {
    return m ? format_metric(m) : std::string(kDash);
  };

  std::string out = pad_right("model", name_width);
  for (const char* h : {"accuracy", "precision", "recall", "f1", "ungraded"}) {
    out += "  " + pad_left(h, 9);
  }
  out += '\n';
  for (const auto& r : rows) {
    out += pad_right(r.name, name_width);
    out += "  " + pad_left(cell(r.row.accuracy), 9);
    out += "  " + pad_left(cell(r.row.precision), 9);
    out += "  " + pad_left(cell(r.row.recall), 9);
    out += "  " + pad_left(cell(r.row.f1), 9);
    out += "  " + pad_left(std::to_string(r.ungraded), 9);
    out += '\n';
  }
  return out;
}

}  // namespace relgrade
