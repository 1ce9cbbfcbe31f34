#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "docmt/corpus.hpp"
#include "docmt/error.hpp"
#include "../support/gen.hpp"

using namespace docmt;
namespace fs = std::filesystem;

namespace {

std::string record(const std::string& id, const std::string& s, const std::string& t) {
  return R"({"doc_id":")" + id + R"(","src_lang":")" + s + R"(","tgt_lang":")" + t +
         R"(","domain":"news","src_segments":["Hello there."],"tgt_segments":["Hallo."]})";
}

}  // namespace

TEST_CASE("parse keeps record order") {
  const auto c = parse_corpus(record("a", "en", "de") + "\n" + record("b", "de", "en") + "\n" +
                              record("c", "en", "zh") + "\n");
  REQUIRE(c.size() == 3);
  CHECK(c.docs[0].doc_id == "a");
  CHECK(c.docs[2].tgt_lang.str() == "zh");
  CHECK(c.docs[1].lang_pair() == "de-en");
}

TEST_CASE("empty input is an empty corpus") { CHECK(parse_corpus("").empty()); }

TEST_CASE("same source and target language is rejected with the doc id") {
  try {
    parse_corpus(record("bad-doc", "en", "en"));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad-doc") != std::string::npos);
  }
}

TEST_CASE("unknown language and unknown keys are rejected") {
  CHECK_THROWS_AS(parse_corpus(record("x", "en", "xx")), ValidationError);
  CHECK_THROWS_AS(parse_corpus(R"({"doc_id":"x","src_lang":"en","tgt_lang":"de","domain":"n",)"
                               R"("src_segments":["a"],"tgt_segments":["b"],"extra":1})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_corpus("{not json"), ValidationError);
}

TEST_CASE("segments are NFC normalized") {
  const auto c = parse_corpus(R"({"doc_id":"n","src_lang":"fr","tgt_lang":"en","domain":"d",)"
                              R"("src_segments":["café"],"tgt_segments":["coffee"]})");
  CHECK(c.docs[0].src_segments[0] == "caf\xC3\xA9");
}

TEST_CASE("round trip through a file is exact, including CJK and combining marks") {
  Corpus c;
  c.docs.push_back(testgen::make_doc("u1", {"\xE4\xBC\x9A\xE8\xAE\xAE\xE4\xB9\x9D\xE7\x82\xB9", "x\xCC\xA3y"},
                                     {"Meeting at nine", "xy"}, "zh", "en"));
  c.docs.push_back(testgen::make_doc("u2", {"a b"}, {"c d"}));
  c.docs[1].meta["source"] = "unit";
  const fs::path p = fs::temp_directory_path() / "docmt_corpus_roundtrip.jsonl";
  save_corpus(c, p);
  const auto back = load_corpus(p);
  fs::remove(p);
  CHECK(back == c);
  CHECK(back.docs[0].src_segments[1] == "x\xCC\xA3y");
}

TEST_CASE("unwritable path raises IoError") {
  Corpus c;
  CHECK_THROWS_AS(save_corpus(c, "/nonexistent-dir/sub/out.jsonl"), IoError);
  CHECK_THROWS_AS(load_corpus("/nonexistent-dir/in.jsonl"), IoError);
}

TEST_CASE("validate_doc flags structural problems") {
  auto d = testgen::make_doc("v", {"a"}, {"b"});
  CHECK_FALSE(validate_doc(d).has_value());
  d.src_segments.clear();
  CHECK(validate_doc(d).has_value());
  d = testgen::make_doc("v", {"a\nb"}, {"b"});
  CHECK(validate_doc(d).has_value());
  d = testgen::make_doc("", {"a"}, {"b"});
  CHECK(validate_doc(d).has_value());
}

TEST_CASE("stats count documents, segments and source words") {
  Corpus c;
  const std::string ten = "one two three four five six seven eight nine ten";
  c.docs.push_back(testgen::make_doc("a", {ten, ten, ten}, {"x", "y", "z"}, "en", "de", "news"));
  c.docs.push_back(testgen::make_doc("b", {ten, ten, ten}, {"x", "y", "z"}, "en", "de", "news"));
  const auto s = corpus_stats(c);
  CHECK(s.total.n_docs == 2);
  CHECK(s.total.n_segments == 6);
  CHECK(s.total.n_words == 60);
  CHECK(s.total.avg_words_per_doc() == 30.0);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].lang_pair == "en->de");
}

TEST_CASE("empty corpus stats are zero") {
  const auto s = corpus_stats(Corpus{});
  CHECK(s.total.n_docs == 0);
  CHECK(s.total.avg_words_per_doc() == 0.0);
}

TEST_CASE("compact count formatting") {
  CHECK(format_count(110000) == "110.0K");
  CHECK(format_count(4400000) == "4.4M");
  CHECK(format_count(96400000) == "96.4M");
  CHECK(format_count(876) == "0.9K");
}
