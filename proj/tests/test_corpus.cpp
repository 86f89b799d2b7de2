#include <doctest.h>

#include <algorithm>
#include <set>

#include "pgnet/corpus.hpp"
#include "testutil.hpp"

using namespace pgnet;

TEST_SUITE("tokenize") {
  TEST_CASE("lowercase and punctuation split") {
    CHECK(tokenize("We can think.") ==
          std::vector<std::string>{"we", "can", "think", "."});
    CHECK(tokenize("uh well yeah.") ==
          std::vector<std::string>{"uh", "well", "yeah", "."});
    CHECK(tokenize("").empty());
    CHECK(tokenize("a(b),c:d!") ==
          std::vector<std::string>{"a", "(", "b", ")", ",", "c", ":", "d", "!"});
    CHECK(tokenize("it's \"quoted\"") ==
          std::vector<std::string>{"it", "'", "s", "\"", "quoted", "\""});
  }
}

TEST_SUITE("vocabulary") {
  TEST_CASE("most frequent tokens after reserved ids") {
    Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 6);
    CHECK(v.size() == 6);
    CHECK(v.id("a") == 4);
    CHECK(v.id("b") == 5);
  }

  TEST_CASE("capacity one keeps only the most frequent") {
    Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 5);
    CHECK(v.size() == 5);
    CHECK(v.id("a") == 4);
    CHECK(v.id("b") == Vocabulary::kUnk);
  }

  TEST_CASE("empty stream leaves only reserved tokens") {
    Vocabulary v = Vocabulary::build({}, 100);
    CHECK(v.size() == 4);
    CHECK(v.token(Vocabulary::kPad) == "[PAD]");
    CHECK(v.token(Vocabulary::kUnk) == "[UNK]");
    CHECK(v.token(Vocabulary::kStart) == "[START]");
    CHECK(v.token(Vocabulary::kStop) == "[STOP]");
  }

  TEST_CASE("frequency ties break lexicographically") {
    Vocabulary v = Vocabulary::build({{"zz", "aa", "mm"}}, 6);
    CHECK(v.id("aa") == 4);
    CHECK(v.id("mm") == 5);
    CHECK(!v.contains("zz"));
  }

  TEST_CASE("text round trip preserves ids and hash") {
    Vocabulary v = Vocabulary::build({{"cat", "cat", "dog", "bird"}}, 10);
    Vocabulary w = Vocabulary::from_text(v.to_text());
    CHECK(w.size() == v.size());
    CHECK(w.id("cat") == v.id("cat"));
    CHECK(w.hash() == v.hash());
  }
}

TEST_SUITE("encode_example") {
  Vocabulary two_word_vocab() { return Vocabulary::build({{"the", "the", "cat"}}, 6); }

  TEST_CASE("article OOV gets the first extended id") {
    Vocabulary v = two_word_vocab();
    const int V = v.size();
    EncodedExample ex = encode_example({"the", "zorp"}, {"zorp"}, v, 400, 100);
    CHECK(ex.article_ids == std::vector<int>{4, Vocabulary::kUnk});
    CHECK(ex.article_extended_ids == std::vector<int>{4, V});
    CHECK(ex.oov_words == std::vector<std::string>{"zorp"});
    CHECK(ex.summary_input_ids ==
          std::vector<int>{Vocabulary::kStart, Vocabulary::kUnk});
    CHECK(ex.summary_target_extended_ids == std::vector<int>{V, Vocabulary::kStop});
  }

  TEST_CASE("fully in-vocab article has no extended ids") {
    Vocabulary v = two_word_vocab();
    EncodedExample ex = encode_example({"the", "cat"}, {"cat"}, v, 400, 100);
    CHECK(ex.article_extended_ids == ex.article_ids);
    CHECK(ex.oov_words.empty());
  }

  TEST_CASE("summary OOV absent from the article maps to UNK") {
    Vocabulary v = two_word_vocab();
    EncodedExample ex = encode_example({"the", "cat"}, {"blimp"}, v, 400, 100);
    CHECK(ex.summary_target_extended_ids ==
          std::vector<int>{Vocabulary::kUnk, Vocabulary::kStop});
  }

  TEST_CASE("truncation and the empty-article error") {
    Vocabulary v = two_word_vocab();
    EncodedExample ex =
        encode_example({"the", "cat", "the", "cat"}, {"cat", "cat", "cat"}, v, 2, 1);
    CHECK(ex.article_ids.size() == 2);
    CHECK(ex.summary_input_ids.size() == 2);             // START + 1 token
    CHECK(ex.summary_target_extended_ids.size() == 2);   // 1 token + STOP
    CHECK_THROWS_WITH_AS(encode_example({}, {"cat"}, v, 10, 10),
                         doctest::Contains("empty article"), PgnetError);
  }

  TEST_CASE("input and target summaries always align") {
    Vocabulary v = two_word_vocab();
    for (int len : {1, 3, 7}) {
      std::vector<std::string> summary(static_cast<size_t>(len), "cat");
      EncodedExample ex = encode_example({"the"}, summary, v, 10, 100);
      CHECK(ex.summary_input_ids.size() == ex.summary_target_extended_ids.size());
    }
  }

  TEST_CASE("round trip through the extended space") {
    Vocabulary v = two_word_vocab();
    std::vector<std::string> article = {"the", "zorp", "cat", "blimp", "zorp"};
    EncodedExample ex = encode_example(article, {}, v, 400, 100);
    CHECK(decode_extended(ex.article_extended_ids, v, ex.oov_words) == article);
    const int limit = v.size() + static_cast<int>(ex.oov_words.size());
    for (int id : ex.article_extended_ids) CHECK(id < limit);
    for (int id : ex.summary_target_extended_ids) CHECK(id < limit);
  }

  TEST_CASE("repeated OOV reuses its extended id") {
    Vocabulary v = two_word_vocab();
    EncodedExample ex = encode_example({"zorp", "the", "zorp"}, {}, v, 400, 100);
    CHECK(ex.oov_words == std::vector<std::string>{"zorp"});
    CHECK(ex.article_extended_ids[0] == ex.article_extended_ids[2]);
  }
}

TEST_SUITE("ingest") {
  TEST_CASE("csv rows arrive in file order") {
    testutil::TempDir dir("csv");
    pgnet::write_file_atomic(dir.file("c.csv"),
                             "transcript,summary\nhello one,sum one\nhello two,sum two\n");
    auto rows = ingest(dir.file("c.csv"), CorpusFormat::kCsv, "transcript", "summary");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].article == "hello one");
    CHECK(rows[1].summary == "sum two");
  }

  TEST_CASE("quoted fields keep embedded commas and quotes") {
    testutil::TempDir dir("csvq");
    pgnet::write_file_atomic(dir.file("c.csv"),
                             "a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n");
    auto rows = ingest(dir.file("c.csv"), CorpusFormat::kCsv, "a", "b");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].article == "x, y");
    CHECK(rows[0].summary == "he said \"hi\"");
  }

  TEST_CASE("missing field names the field") {
    testutil::TempDir dir("csvm");
    pgnet::write_file_atomic(dir.file("c.csv"), "a,b\n1,2\n");
    CHECK_THROWS_WITH_AS(ingest(dir.file("c.csv"), CorpusFormat::kCsv, "a", "nope"),
                         doctest::Contains("missing field 'nope'"), PgnetError);
  }

  TEST_CASE("short row reports its line number") {
    testutil::TempDir dir("csvr");
    pgnet::write_file_atomic(dir.file("c.csv"), "a,b\nok,fine\nonly-one\n");
    CHECK_THROWS_WITH_AS(ingest(dir.file("c.csv"), CorpusFormat::kCsv, "a", "b"),
                         doctest::Contains("row 3"), PgnetError);
  }

  TEST_CASE("jsonl ignores extra keys and reports missing ones") {
    testutil::TempDir dir("jl");
    pgnet::write_file_atomic(
        dir.file("c.jsonl"),
        "{\"article\": \"a1\", \"summary\": \"s1\", \"extra\": 7}\n"
        "{\"article\": \"a2\", \"summary\": \"s2\"}\n");
    auto rows = ingest(dir.file("c.jsonl"), CorpusFormat::kJsonl, "article", "summary");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].article == "a1");

    pgnet::write_file_atomic(dir.file("bad.jsonl"), "{\"article\": \"a\"}\n");
    CHECK_THROWS_WITH_AS(
        ingest(dir.file("bad.jsonl"), CorpusFormat::kJsonl, "article", "summary"),
        doctest::Contains("line 1"), PgnetError);
  }

  TEST_CASE("canonical corpus round trips") {
    const std::vector<RawExample> examples = {{"art \"one\"", "sum, one"},
                                              {"art two\nwith newline", "sum two"}};
    auto back = corpus_from_jsonl(corpus_to_jsonl(examples));
    REQUIRE(back.size() == 2);
    CHECK(back[0].article == examples[0].article);
    CHECK(back[1].article == examples[1].article);
  }
}

TEST_SUITE("split_dataset") {
  TEST_CASE("the 142-transcript corpus splits 99/21/22") {
    SplitManifest m = split_dataset(142, {0.70, 0.15, 0.15}, 7);
    CHECK(m.train.size() == 99);
    CHECK(m.validation.size() == 21);
    CHECK(m.test.size() == 22);
  }

  TEST_CASE("round numbers") {
    SplitManifest m = split_dataset(100, {0.70, 0.15, 0.15}, 7);
    CHECK(m.train.size() == 70);
    CHECK(m.validation.size() == 15);
    CHECK(m.test.size() == 15);
  }

  TEST_CASE("seed determinism and JSON round trip") {
    SplitManifest a = split_dataset(50, {0.70, 0.15, 0.15}, 99);
    SplitManifest b = split_dataset(50, {0.70, 0.15, 0.15}, 99);
    CHECK(a.to_json() == b.to_json());
    SplitManifest c = SplitManifest::from_json(a.to_json());
    CHECK(c.train == a.train);
    CHECK(c.validation == a.validation);
    CHECK(c.test == a.test);
    CHECK(c.seed == 99);
  }

  TEST_CASE("splits are disjoint and cover the corpus") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
      SplitManifest m = split_dataset(37, {0.70, 0.15, 0.15}, seed);
      std::set<int> all;
      for (const auto* split : {&m.train, &m.validation, &m.test})
        for (int id : *split) CHECK(all.insert(id).second);  // no duplicates
      CHECK(all.size() == 37);
      CHECK(*all.begin() == 0);
      CHECK(*all.rbegin() == 36);
    }
  }

  TEST_CASE("validation errors") {
    CHECK_THROWS_AS(split_dataset(2, {0.70, 0.15, 0.15}, 1), PgnetError);
    CHECK_THROWS_AS(split_dataset(10, {0.5, 0.2, 0.2}, 1), PgnetError);
    CHECK_THROWS_AS(split_dataset(10, {1.0, -0.1, 0.1}, 1), PgnetError);
  }
}

TEST_SUITE("batch") {
  Vocabulary vb() { return Vocabulary::build({{"a", "b", "c"}}, 10); }

  TEST_CASE("padding and masks") {
    Vocabulary v = vb();
    std::vector<EncodedExample> ex = {
        encode_example({"a", "b", "c"}, {"a"}, v, 400, 100),
        encode_example({"a", "b", "c", "a", "b"}, {"a", "b"}, v, 400, 100)};
    auto batches = make_batches(ex, 2);
    REQUIRE(batches.size() == 1);
    const Batch& b = batches[0];
    CHECK(b.article_ids[0].size() == 5);
    CHECK(b.article_mask[0] == std::vector<int>{1, 1, 1, 0, 0});
    CHECK(b.article_mask[1] == std::vector<int>{1, 1, 1, 1, 1});
    CHECK(b.article_ids[0][3] == Vocabulary::kPad);
    CHECK(b.summary_mask[0] == std::vector<int>{1, 1, 0});
  }

  TEST_CASE("single example needs no padding") {
    Vocabulary v = vb();
    std::vector<EncodedExample> ex = {encode_example({"a", "b"}, {"a"}, v, 400, 100)};
    auto batches = make_batches(ex, 4);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].article_ids[0].size() == 2);
    CHECK(batches[0].article_mask[0] == std::vector<int>{1, 1});
  }

  TEST_CASE("five examples in batches of two arrive as 2,2,1") {
    Vocabulary v = vb();
    std::vector<EncodedExample> ex(5, encode_example({"a"}, {"b"}, v, 400, 100));
    auto batches = make_batches(ex, 2);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 2);
    CHECK(batches[1].size() == 2);
    CHECK(batches[2].size() == 1);
  }
}
