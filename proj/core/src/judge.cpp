#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "relgrade/grading.hpp"

namespace relgrade {

namespace {

using nlohmann::json;

struct Job {
  const PairRecord* pair;
  const std::string* doc_text;
  const std::string* query_text;
};

std::string upper_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string truncate(const std::string& s, std::size_t n) {
  if (s.size() <= n) return s;
  return s.substr(0, n) + "...";
}

std::string request_body(const JudgeConfig& config, const std::string& system_prompt,
                         const Job& job) {
  json j;
  j["model"] = config.model;
  j["temperature"] = 0;
  j["messages"] = json::array(
      {json{{"role", "system"}, {"content", system_prompt}},
       json{{"role", "user"},
            {"content", build_judge_user_message(*job.doc_text, *job.query_text)}}});
  return j.dump();
}

std::optional<std::string> extract_reply(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  const auto* choices = j.find("choices") != j.end() ? &j["choices"] : nullptr;
  if (!choices || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& message = (*choices)[0].find("message") != (*choices)[0].end()
                            ? (*choices)[0]["message"]
                            : json();
  if (!message.is_object()) return std::nullopt;
  auto it = message.find("content");
  if (it == message.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

GraderVerdict grade_one(const Job& job, httplib::Client& client,
                        const httplib::Headers& headers, const std::string& system_prompt,
                        const JudgeConfig& config) {
  GraderVerdict verdict{job.pair->key(), std::nullopt, ""};
  const std::string body = request_body(config, system_prompt, job);
  std::string last_error = "no attempt made";

  const int attempts = config.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    auto res = client.Post(config.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    auto reply = extract_reply(res->body);
    if (!reply) {
      last_error = "malformed response body: " + truncate(res->body, 200);
      continue;
    }
    auto relevant = parse_judge_reply(*reply);
    if (!relevant) {
      last_error = "unparseable reply: " + truncate(*reply, 200);
      continue;
    }
    verdict.relevant = *relevant;
    verdict.raw = *reply;
    return verdict;
  }
  verdict.raw = "ungraded after " + std::to_string(attempts) + " attempts: " + last_error;
  return verdict;
}

}  // namespace

std::string default_judge_prompt() {
  return "Please analyze the contents of DOCUMENTS and determine whether it is "
         "relevant in answering the QUESTION. End your reply with a single line: "
         "VERDICT: RELEVANT or VERDICT: NOT RELEVANT.";
}

void load_judge_token_from_env(JudgeConfig& config) {
  const char* token = std::getenv("RELGRADE_JUDGE_TOKEN");
  config.auth_token = token ? token : "";
}

std::string build_judge_user_message(const std::string& document_text,
                                     const std::string& query_text) {
  return "DOCUMENTS:\n" + document_text + "\n\nQUESTION:\n" + query_text + "\n";
}

std::optional<bool> parse_judge_reply(const std::string& reply) {
  const std::string upper = upper_copy(reply);

  const auto pos = upper.rfind("VERDICT");
  if (pos != std::string::npos) {
    const auto eol = upper.find('\n', pos);
    const std::string line =
        upper.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    if (line.find("NOT RELEVANT") != std::string::npos) return false;
    if (line.find("IRRELEVANT") != std::string::npos) return false;
    if (line.find("RELEVANT") != std::string::npos) return true;
  }

  if (upper.find("NOT RELEVANT") != std::string::npos) return false;
  if (upper.find("IRRELEVANT") != std::string::npos) return false;
  if (upper.find("RELEVANT") != std::string::npos) return true;
  return std::nullopt;
}

std::vector<GraderVerdict> grade_with_judge(const std::vector<PairRecord>& pairs,
                                            const Corpus& corpus,
                                            const JudgeConfig& config) {
  if (config.endpoint.empty()) throw std::invalid_argument("judge endpoint is empty");
  if (config.timeout_ms <= 0) throw std::invalid_argument("timeout_ms must be positive");
  if (config.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (config.parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");

  std::vector<Job> jobs;
  jobs.reserve(pairs.size());
  for (const auto& p : pairs) {
    const Document* doc = corpus.find_document(p.doc_id);
    if (!doc) throw std::invalid_argument("unknown document " + p.doc_id);
    if (!doc->text) {
      throw std::invalid_argument("document " + p.doc_id + " has no text to judge");
    }
    const Query* query = corpus.find_query(p.query_id);
    if (!query) throw std::invalid_argument("unknown query " + p.query_id);
    jobs.push_back(Job{&p, &*doc->text, &query->text});
  }

  const std::string system_prompt =
      config.system_prompt.empty() ? default_judge_prompt() : config.system_prompt;
  httplib::Headers headers;
  if (!config.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + config.auth_token);
  }

  std::vector<GraderVerdict> verdicts(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    httplib::Client client(config.endpoint);
    const time_t sec = config.timeout_ms / 1000;
    const time_t usec = static_cast<time_t>(config.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= jobs.size()) break;
      verdicts[i] = grade_one(jobs[i], client, headers, system_prompt, config);
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), pairs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return verdicts;
}

}  // namespace relgrade
