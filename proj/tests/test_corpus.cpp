#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "relgrade/corpus.hpp"
#include "relgrade/errors.hpp"
#include "relgrade/random.hpp"

using relgrade::Corpus;
using relgrade::Date;
using relgrade::Document;
using relgrade::EmbeddingVector;
using relgrade::IndexEngine;
using relgrade::PairGenConfig;
using relgrade::PairRecord;
using relgrade::Query;
using relgrade::Split;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "relgrade_corpus_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

Date date(const char* s) { return *Date::parse(s); }

// Unit vector on the xy-circle at the given angle (degrees); cosine to the
// 0-degree query is cos(angle).
EmbeddingVector at_angle(double degrees) {
  const double rad = degrees * 3.141592653589793 / 180.0;
  return EmbeddingVector({static_cast<float>(std::cos(rad)),
                          static_cast<float>(std::sin(rad)), 0.0f});
}

Document make_doc(std::string id, const char* day, double degrees) {
  return Document{std::move(id), date(day), "feed", std::nullopt, at_angle(degrees)};
}

Query make_query(std::string id, double degrees = 0.0) {
  return Query{std::move(id), "Banking", "general", "what moved the markets",
               at_angle(degrees)};
}

PairRecord labeled_pair(std::string qid, std::string did, double cosine, bool label) {
  PairRecord p{std::move(qid), std::move(did), date("2025-03-01"), 1, cosine,
               label, std::nullopt};
  return p;
}

}  // namespace

TEST_CASE("document ingest counts and atomicity") {
  Corpus corpus(3);

  SUBCASE("empty file ingests zero documents") {
    const auto path = temp_file("empty.jsonl");
    write_file(path, "");
    CHECK(corpus.ingest_documents(path) == 0);
    CHECK(corpus.documents().empty());
  }

  SUBCASE("three valid lines") {
    const auto path = temp_file("three.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-03-01","source":"feed","text":"a","embedding":[1,0,0]})"
               "\n"
               R"({"doc_id":"d2","date":"2025-03-02","source":"feed","embedding":[0,1,0]})"
               "\n"
               R"({"doc_id":"d3","date":"2025-03-02","source":"wire","text":"c","embedding":[0,0,1]})"
               "\n");
    CHECK(corpus.ingest_documents(path) == 3);
    CHECK(corpus.documents().size() == 3);
    CHECK(corpus.find_document("d2") != nullptr);
    CHECK(!corpus.find_document("d2")->text.has_value());
    CHECK(corpus.find_document("d1")->text == "a");
    auto range = corpus.date_range();
    REQUIRE(range.has_value());
    CHECK(range->first == date("2025-03-01"));
    CHECK(range->second == date("2025-03-02"));
  }

  SUBCASE("malformed line rejects the whole file and names the line") {
    const auto path = temp_file("broken.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-03-01","source":"feed","embedding":[1,0,0]})"
               "\n"
               "{not json}\n");
    CHECK_THROWS_WITH_AS(corpus.ingest_documents(path),
                         doctest::Contains(":2:"), relgrade::ParseError);
    CHECK(corpus.documents().empty());
  }

  SUBCASE("wrong dimension names the line") {
    const auto path = temp_file("wrongdim.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-03-01","source":"feed","embedding":[1,0,0]})"
               "\n"
               R"({"doc_id":"d2","date":"2025-03-01","source":"feed","embedding":[1,0]})"
               "\n");
    CHECK_THROWS_WITH_AS(corpus.ingest_documents(path),
                         doctest::Contains(":2:"), relgrade::ParseError);
    CHECK(corpus.documents().empty());
  }

  SUBCASE("duplicate id inside one file") {
    const auto path = temp_file("dup.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-03-01","source":"a","embedding":[1,0,0]})"
               "\n"
               R"({"doc_id":"d1","date":"2025-03-02","source":"b","embedding":[0,1,0]})"
               "\n");
    CHECK_THROWS_AS(corpus.ingest_documents(path), relgrade::ParseError);
    CHECK(corpus.documents().empty());
  }

  SUBCASE("duplicate id against already-ingested documents") {
    corpus.add_document(make_doc("d1", "2025-03-01", 10.0));
    const auto path = temp_file("dup2.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-03-02","source":"b","embedding":[0,1,0]})"
               "\n");
    CHECK_THROWS_AS(corpus.ingest_documents(path), relgrade::ParseError);
    CHECK(corpus.documents().size() == 1);
  }

  SUBCASE("zero embedding is rejected") {
    const auto path = temp_file("zero.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-03-01","source":"a","embedding":[0,0,0]})"
               "\n");
    CHECK_THROWS_AS(corpus.ingest_documents(path), relgrade::ParseError);
  }

  SUBCASE("invalid calendar date is rejected") {
    const auto path = temp_file("baddate.jsonl");
    write_file(path,
               R"({"doc_id":"d1","date":"2025-02-30","source":"a","embedding":[1,0,0]})"
               "\n");
    CHECK_THROWS_AS(corpus.ingest_documents(path), relgrade::ParseError);
  }

  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(corpus.ingest_documents(temp_file("does_not_exist.jsonl")),
                    relgrade::IoError);
  }
}

TEST_CASE("query ingest validates the field set") {
  Corpus corpus(3);
  const auto path = temp_file("queries.jsonl");

  SUBCASE("default fields are accepted") {
    write_file(path,
               R"({"query_id":"q1","field":"Banking","category":"rates","text":"t","embedding":[1,0,0]})"
               "\n"
               R"({"query_id":"q2","field":"Healthcare","category":"drugs","text":"t","embedding":[0,1,0]})"
               "\n");
    CHECK(corpus.ingest_queries(path) == 2);
    CHECK(corpus.find_query("q1")->field == "Banking");
  }

  SUBCASE("unknown field is rejected with a line number") {
    write_file(path,
               R"({"query_id":"q1","field":"Astrology","category":"c","text":"t","embedding":[1,0,0]})"
               "\n");
    CHECK_THROWS_WITH_AS(corpus.ingest_queries(path),
                         doctest::Contains(":1:"), relgrade::ParseError);
  }

  SUBCASE("a custom field set replaces the default") {
    corpus.set_allowed_fields({"Astrology"});
    write_file(path,
               R"({"query_id":"q1","field":"Astrology","category":"c","text":"t","embedding":[1,0,0]})"
               "\n");
    CHECK(corpus.ingest_queries(path) == 1);
  }

  SUBCASE("duplicate query ids are rejected") {
    write_file(path,
               R"({"query_id":"q1","field":"Banking","category":"c","text":"t","embedding":[1,0,0]})"
               "\n"
               R"({"query_id":"q1","field":"Legal","category":"c","text":"t","embedding":[0,1,0]})"
               "\n");
    CHECK_THROWS_AS(corpus.ingest_queries(path), relgrade::ParseError);
    CHECK(corpus.queries().empty());
  }
}

TEST_CASE("pair generation replays the daily protocol") {
  Corpus corpus(3);
  PairGenConfig config;
  config.engine = IndexEngine::kBruteForce;

  SUBCASE("every date with at least k documents yields exactly q*d*k records") {
    corpus.add_document(make_doc("a1", "2025-03-01", 10.0));
    corpus.add_document(make_doc("a2", "2025-03-01", 20.0));
    corpus.add_document(make_doc("b1", "2025-03-02", 30.0));
    corpus.add_document(make_doc("c1", "2025-03-03", 40.0));
    corpus.add_query(make_query("q1", 0.0));
    corpus.add_query(make_query("q2", 90.0));

    config.window_start = date("2025-03-01");
    config.window_end = date("2025-03-03");
    config.k = 2;
    auto result = relgrade::generate_pairs(corpus, config);
    CHECK(result.pairs.size() == 2 * 3 * 2);
    CHECK(result.dates_searched == 3);
    CHECK(result.dates_without_documents == 0);
  }

  SUBCASE("fewer documents than k") {
    corpus.add_document(make_doc("a1", "2025-03-01", 10.0));
    corpus.add_document(make_doc("a2", "2025-03-01", 20.0));
    corpus.add_document(make_doc("a3", "2025-03-01", 30.0));
    corpus.add_query(make_query("q1"));
    config.window_start = config.window_end = date("2025-03-01");
    config.k = 5;
    auto result = relgrade::generate_pairs(corpus, config);
    CHECK(result.pairs.size() == 3);
    CHECK(result.pairs[0].rank == 1);
    CHECK(result.pairs[2].rank == 3);
  }

  SUBCASE("documents only become visible from their date onward") {
    corpus.add_document(make_doc("early", "2025-03-01", 25.0));
    corpus.add_document(make_doc("late", "2025-03-02", 5.0));
    corpus.add_query(make_query("q1"));
    config.window_start = date("2025-03-01");
    config.window_end = date("2025-03-02");
    config.k = 1;
    auto result = relgrade::generate_pairs(corpus, config);
    REQUIRE(result.pairs.size() == 2);
    CHECK(result.pairs[0].retrieval_date == date("2025-03-01"));
    CHECK(result.pairs[0].doc_id == "early");
    CHECK(result.pairs[1].retrieval_date == date("2025-03-02"));
    CHECK(result.pairs[1].doc_id == "late");
  }

  SUBCASE("emitted cosine equals the direct recomputation") {
    corpus.add_document(make_doc("a", "2025-03-01", 25.0));
    corpus.add_document(make_doc("b", "2025-03-01", 70.0));
    corpus.add_query(make_query("q1", 10.0));
    config.window_start = config.window_end = date("2025-03-01");
    config.k = 2;
    auto result = relgrade::generate_pairs(corpus, config);
    for (const auto& p : result.pairs) {
      const auto* q = corpus.find_query(p.query_id);
      const auto* d = corpus.find_document(p.doc_id);
      CHECK(p.cosine == relgrade::cosine_similarity(q->embedding, d->embedding));
    }
    CHECK(result.pairs[0].cosine == doctest::Approx(std::cos(15.0 * 3.141592653589793 / 180.0)));
  }

  SUBCASE("days before the first document are counted, not searched") {
    corpus.add_document(make_doc("a", "2025-03-03", 10.0));
    corpus.add_query(make_query("q1"));
    config.window_start = date("2025-03-01");
    config.window_end = date("2025-03-04");
    config.k = 1;
    auto result = relgrade::generate_pairs(corpus, config);
    CHECK(result.dates_without_documents == 2);
    CHECK(result.dates_searched == 2);
    CHECK(result.pairs.size() == 2);
  }

  SUBCASE("output is in (date, query_id, rank) order") {
    for (int i = 0; i < 6; ++i) {
      corpus.add_document(make_doc("d" + std::to_string(i),
                                   i < 3 ? "2025-03-01" : "2025-03-02", 10.0 + 7.0 * i));
    }
    corpus.add_query(make_query("q2", 0.0));
    corpus.add_query(make_query("q1", 45.0));
    config.window_start = date("2025-03-01");
    config.window_end = date("2025-03-02");
    config.k = 3;
    auto result = relgrade::generate_pairs(corpus, config);
    REQUIRE(result.pairs.size() == 12);
    for (std::size_t i = 1; i < result.pairs.size(); ++i) {
      const auto& a = result.pairs[i - 1];
      const auto& b = result.pairs[i];
      const auto ka = std::make_tuple(a.retrieval_date.serial(), a.query_id, a.rank);
      const auto kb = std::make_tuple(b.retrieval_date.serial(), b.query_id, b.rank);
      CHECK(ka < kb);
    }
  }

  SUBCASE("dedupe drops repeats of a pair on later dates") {
    corpus.add_document(make_doc("a", "2025-03-01", 20.0));
    corpus.add_document(make_doc("b", "2025-03-01", 35.0));
    corpus.add_document(make_doc("c", "2025-03-02", 5.0));
    corpus.add_query(make_query("q1"));
    config.window_start = date("2025-03-01");
    config.window_end = date("2025-03-02");
    config.k = 2;

    auto plain = relgrade::generate_pairs(corpus, config);
    CHECK(plain.pairs.size() == 4);
    CHECK(plain.deduped == 0);

    config.dedupe = true;
    auto deduped = relgrade::generate_pairs(corpus, config);
    REQUIRE(deduped.pairs.size() == 3);
    CHECK(deduped.deduped == 1);
    // day 2 keeps only the new arrival, at its original rank
    CHECK(deduped.pairs[2].doc_id == "c");
    CHECK(deduped.pairs[2].rank == 1);
  }

  SUBCASE("hnsw and brute force engines agree on a small corpus") {
    std::mt19937_64 eng(3);
    for (int i = 0; i < 40; ++i) {
      corpus.add_document(make_doc("d" + std::to_string(i),
                                   i % 2 ? "2025-03-01" : "2025-03-02",
                                   relgrade::rng::uniform(eng, 0.0, 180.0)));
    }
    corpus.add_query(make_query("q1", 15.0));
    config.window_start = date("2025-03-01");
    config.window_end = date("2025-03-02");
    config.k = 5;

    auto bf = relgrade::generate_pairs(corpus, config);
    config.engine = IndexEngine::kHnsw;
    config.ef_search = 64;
    auto hnsw = relgrade::generate_pairs(corpus, config);
    REQUIRE(bf.pairs.size() == hnsw.pairs.size());
    for (std::size_t i = 0; i < bf.pairs.size(); ++i) {
      CHECK(bf.pairs[i].doc_id == hnsw.pairs[i].doc_id);
      CHECK(bf.pairs[i].cosine == hnsw.pairs[i].cosine);
    }
  }

  SUBCASE("usage errors") {
    corpus.add_document(make_doc("a", "2025-03-05", 10.0));
    corpus.add_query(make_query("q1"));
    config.window_start = date("2025-03-02");
    config.window_end = date("2025-03-01");
    CHECK_THROWS_AS(relgrade::generate_pairs(corpus, config), std::invalid_argument);

    config.window_end = date("2025-03-02");
    config.k = 0;
    CHECK_THROWS_AS(relgrade::generate_pairs(corpus, config), std::invalid_argument);

    config.k = 1;
    // window ends before any document exists
    CHECK_THROWS_AS(relgrade::generate_pairs(corpus, config), std::domain_error);
  }
}

TEST_CASE("similarity histogram") {
  SUBCASE("single pair lands in one bin") {
    std::vector<PairRecord> pairs{labeled_pair("q", "d", 0.4, true)};
    auto bins = relgrade::similarity_histogram(pairs, 10, false);
    REQUIRE(bins.size() == 10);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.total;
    CHECK(total == 1);
  }

  SUBCASE("counts are conserved and the max lands in the last bin") {
    std::mt19937_64 eng(5);
    std::vector<PairRecord> pairs;
    for (int i = 0; i < 500; ++i) {
      pairs.push_back(labeled_pair("q", "d" + std::to_string(i),
                                   relgrade::rng::uniform(eng, -0.2, 0.9), i % 7 == 0));
    }
    auto bins = relgrade::similarity_histogram(pairs, 16, true);
    std::size_t total = 0, pos = 0, neg = 0;
    for (const auto& b : bins) {
      total += b.total;
      pos += b.positive;
      neg += b.negative;
      CHECK(b.total == b.positive + b.negative);
    }
    CHECK(total == 500);
    CHECK(pos + neg == 500);

    double hi = pairs[0].cosine;
    for (const auto& p : pairs) hi = std::max(hi, p.cosine);
    CHECK(bins.back().hi == hi);
    CHECK(bins.back().total > 0);
  }

  SUBCASE("two tight clusters show up as a bimodal profile") {
    std::mt19937_64 eng(8);
    std::vector<PairRecord> pairs;
    for (int i = 0; i < 400; ++i) {
      const double center = i % 2 ? 0.15 : 0.8;
      pairs.push_back(labeled_pair("q", "d" + std::to_string(i),
                                   center + 0.03 * relgrade::rng::normal(eng), i % 2 == 0));
    }
    auto bins = relgrade::similarity_histogram(pairs, 12, false);
    const std::size_t third = bins.size() / 3;
    std::size_t low = 0, mid = 0, high = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (i < third) {
        low += bins[i].total;
      } else if (i < 2 * third) {
        mid += bins[i].total;
      } else {
        high += bins[i].total;
      }
    }
    CHECK(low > mid);
    CHECK(high > mid);
  }

  SUBCASE("identical cosines collapse into the first bin") {
    std::vector<PairRecord> pairs{labeled_pair("q", "a", 0.5, true),
                                  labeled_pair("q", "b", 0.5, false)};
    auto bins = relgrade::similarity_histogram(pairs, 4, false);
    CHECK(bins[0].total == 2);
    CHECK(bins[0].lo == bins[0].hi);
  }

  SUBCASE("by-label histogram requires labels") {
    std::vector<PairRecord> pairs{labeled_pair("q", "a", 0.5, true)};
    pairs.push_back(PairRecord{"q", "b", date("2025-03-01"), 1, 0.2, std::nullopt,
                               std::nullopt});
    CHECK_THROWS_AS(relgrade::similarity_histogram(pairs, 4, true), std::invalid_argument);
    CHECK_NOTHROW(relgrade::similarity_histogram(pairs, 4, false));
  }

  SUBCASE("empty input and zero bins are usage errors") {
    std::vector<PairRecord> none;
    CHECK_THROWS_AS(relgrade::similarity_histogram(none, 4, false), std::invalid_argument);
    std::vector<PairRecord> one{labeled_pair("q", "a", 0.5, true)};
    CHECK_THROWS_AS(relgrade::similarity_histogram(one, 0, false), std::invalid_argument);
  }

  SUBCASE("csv export") {
    std::vector<PairRecord> pairs{labeled_pair("q", "a", 0.0, true),
                                  labeled_pair("q", "b", 1.0, false)};
    const auto csv = relgrade::histogram_csv(relgrade::similarity_histogram(pairs, 2, true));
    CHECK(csv ==
          "bin_lo,bin_hi,count_total,count_positive,count_negative\n"
          "0.000000,0.500000,1,1,0\n"
          "0.500000,1.000000,1,0,1\n");
  }
}

TEST_CASE("positive rate") {
  std::vector<PairRecord> pairs;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back(labeled_pair("q", "d" + std::to_string(i), 0.5, i < 3));
  }
  CHECK(relgrade::positive_rate(pairs) == doctest::Approx(0.3));

  pairs.push_back(PairRecord{"q", "x", date("2025-03-01"), 1, 0.5, std::nullopt,
                             std::nullopt});
  CHECK(relgrade::positive_rate(pairs) == doctest::Approx(0.3));

  std::vector<PairRecord> unlabeled{
      PairRecord{"q", "x", date("2025-03-01"), 1, 0.5, std::nullopt, std::nullopt}};
  CHECK_THROWS_AS(relgrade::positive_rate(unlabeled), std::invalid_argument);
}

TEST_CASE("pairs jsonl round trip") {
  std::vector<PairRecord> pairs;
  pairs.push_back(PairRecord{"q1", "d1", date("2025-03-01"), 1, 0.73125, true,
                             Split::kTrain});
  pairs.push_back(PairRecord{"q1", "d2", date("2025-03-01"), 2, -0.119, false,
                             Split::kTest});
  pairs.push_back(PairRecord{"q2", "d1", date("2025-03-02"), 1, 0.5, std::nullopt,
                             std::nullopt});

  const auto path = temp_file("pairs.jsonl");
  relgrade::write_pairs_jsonl(path, pairs);
  const auto back = relgrade::read_pairs_jsonl(path);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(back[i].query_id == pairs[i].query_id);
    CHECK(back[i].doc_id == pairs[i].doc_id);
    CHECK(back[i].retrieval_date == pairs[i].retrieval_date);
    CHECK(back[i].rank == pairs[i].rank);
    CHECK(back[i].cosine == pairs[i].cosine);
    CHECK(back[i].label == pairs[i].label);
    CHECK(back[i].split == pairs[i].split);
  }
}

TEST_CASE("pairs jsonl rejects malformed records") {
  const auto path = temp_file("pairs_bad.jsonl");

  SUBCASE("duplicate key") {
    write_file(path,
               R"({"query_id":"q","doc_id":"d","retrieval_date":"2025-03-01","rank":1,"cosine":0.5})"
               "\n"
               R"({"query_id":"q","doc_id":"d","retrieval_date":"2025-03-01","rank":2,"cosine":0.4})"
               "\n");
    CHECK_THROWS_WITH_AS(relgrade::read_pairs_jsonl(path),
                         doctest::Contains(":2:"), relgrade::ParseError);
  }

  SUBCASE("zero rank") {
    write_file(path,
               R"({"query_id":"q","doc_id":"d","retrieval_date":"2025-03-01","rank":0,"cosine":0.5})"
               "\n");
    CHECK_THROWS_AS(relgrade::read_pairs_jsonl(path), relgrade::ParseError);
  }

  SUBCASE("cosine out of range") {
    write_file(path,
               R"({"query_id":"q","doc_id":"d","retrieval_date":"2025-03-01","rank":1,"cosine":1.5})"
               "\n");
    CHECK_THROWS_AS(relgrade::read_pairs_jsonl(path), relgrade::ParseError);
  }

  SUBCASE("bad split value") {
    write_file(path,
               R"({"query_id":"q","doc_id":"d","retrieval_date":"2025-03-01","rank":1,"cosine":0.5,"split":"validation"})"
               "\n");
    CHECK_THROWS_AS(relgrade::read_pairs_jsonl(path), relgrade::ParseError);
  }
}

TEST_CASE("documents and queries jsonl writers round trip through ingest") {
  Corpus corpus(3);
  corpus.add_document(make_doc("d1", "2025-03-01", 10.0));
  corpus.add_document(make_doc("d2", "2025-03-02", 75.0));
  corpus.add_query(make_query("q1", 5.0));

  const auto dpath = temp_file("docs_rt.jsonl");
  const auto qpath = temp_file("queries_rt.jsonl");
  relgrade::write_documents_jsonl(dpath, corpus.documents());
  relgrade::write_queries_jsonl(qpath, corpus.queries());

  Corpus back(3);
  CHECK(back.ingest_documents(dpath) == 2);
  CHECK(back.ingest_queries(qpath) == 1);
  CHECK(back.find_document("d2")->embedding == corpus.find_document("d2")->embedding);
  CHECK(back.find_query("q1")->embedding == corpus.find_query("q1")->embedding);
  CHECK(back.find_document("d1")->date == date("2025-03-01"));
}
