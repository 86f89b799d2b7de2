#include "pgnet/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

namespace pgnet {

namespace {
using nlohmann::json;

constexpr const char* kPunct = ".,?!'\"():";

bool is_punct(char c) {
  for (const char* p = kPunct; *p; ++p)
    if (*p == c) return true;
  return false;
}
}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::string spaced;
  spaced.reserve(text.size() * 2);
  for (char c : text) {
    if (is_punct(c)) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return split_ws(spaced);
}

EncodedExample encode_example(const std::vector<std::string>& article_tokens,
                              const std::vector<std::string>& summary_tokens,
                              const Vocabulary& vocab, int max_article_len,
                              int max_summary_len) {
  if (max_article_len <= 0 || max_summary_len <= 0)
    fail("encode_example: truncation limits must be positive");

  const int V = vocab.size();
  EncodedExample ex;

  const size_t alen =
      std::min(article_tokens.size(), static_cast<size_t>(max_article_len));
  if (alen == 0) fail("encode_example: empty article after truncation");

  std::unordered_map<std::string, int> oov_index;
  for (size_t i = 0; i < alen; ++i) {
    const std::string& tok = article_tokens[i];
    const int id = vocab.id(tok);
    ex.article_ids.push_back(id);
    if (id == Vocabulary::kUnk) {
      auto it = oov_index.find(tok);
      if (it == oov_index.end()) {
        it = oov_index.emplace(tok, static_cast<int>(ex.oov_words.size())).first;
        ex.oov_words.push_back(tok);
      }
      ex.article_extended_ids.push_back(V + it->second);
    } else {
      ex.article_extended_ids.push_back(id);
    }
  }

  const size_t slen =
      std::min(summary_tokens.size(), static_cast<size_t>(max_summary_len));
  ex.summary_input_ids.push_back(Vocabulary::kStart);
  for (size_t i = 0; i < slen; ++i) {
    const std::string& tok = summary_tokens[i];
    const int id = vocab.id(tok);
    ex.summary_input_ids.push_back(id);
    if (id == Vocabulary::kUnk) {
      auto it = oov_index.find(tok);
      ex.summary_target_extended_ids.push_back(
          it == oov_index.end() ? Vocabulary::kUnk : V + it->second);
    } else {
      ex.summary_target_extended_ids.push_back(id);
    }
  }
  ex.summary_target_extended_ids.push_back(Vocabulary::kStop);
  return ex;
}

std::vector<std::string> decode_extended(const std::vector<int>& ids,
                                         const Vocabulary& vocab,
                                         const std::vector<std::string>& oov_words) {
  const int V = vocab.size();
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < V) {
      out.push_back(vocab.token(id));
    } else if (id < V + static_cast<int>(oov_words.size())) {
      out.push_back(oov_words[static_cast<size_t>(id - V)]);
    } else {
      fail("decode: extended id ", id, " out of range for V=", V, " with ",
           oov_words.size(), " OOV words");
    }
  }
  return out;
}

CorpusFormat parse_format(const std::string& name) {
  if (name == "csv") return CorpusFormat::kCsv;
  if (name == "jsonl") return CorpusFormat::kJsonl;
  fail("unknown corpus format '", name, "' (expected csv or jsonl)");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  size_t line = 1;
  size_t i = 0;
  const size_t n = text.size();

  while (i < n) {
    size_t row_line = line;
    row.clear();
    bool done_row = false;
    while (!done_row) {
      field.clear();
      if (i < n && text[i] == '"') {
        ++i;  // opening quote
        bool closed = false;
        while (i < n) {
          char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field += '"';
              i += 2;
            } else {
              ++i;
              closed = true;
              break;
            }
          } else {
            if (c == '\n') ++line;
            field += c;
            ++i;
          }
        }
        if (!closed) fail("csv: unterminated quoted field starting near line ", row_line);
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          fail("csv: malformed row at line ", line, ": content after closing quote");
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"')
            fail("csv: malformed row at line ", line, ": stray quote in unquoted field");
          field += text[i];
          ++i;
        }
      }
      row.push_back(field);
      if (i >= n) {
        done_row = true;
      } else if (text[i] == ',') {
        ++i;
      } else {  // \r or \n
        if (text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') {
          ++i;
          ++line;
        }
        done_row = true;
      }
    }
    // A lone trailing newline yields an empty single-field row; drop it.
    if (!(row.size() == 1 && row[0].empty() && i >= n)) rows.push_back(row);
  }
  return rows;
}

namespace {

std::vector<RawExample> ingest_csv(const std::string& text,
                                   const std::string& article_field,
                                   const std::string& summary_field) {
  auto rows = parse_csv(text);
  if (rows.empty()) fail("csv: empty file");
  const auto& header = rows[0];
  int a_col = -1, s_col = -1;
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == article_field) a_col = static_cast<int>(j);
    if (header[j] == summary_field) s_col = static_cast<int>(j);
  }
  if (a_col < 0) fail("csv: missing field '", article_field, "' in header");
  if (s_col < 0) fail("csv: missing field '", summary_field, "' in header");

  std::vector<RawExample> out;
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      fail("csv: row ", r + 1, " has ", rows[r].size(), " fields, header has ",
           header.size());
    out.push_back({rows[r][static_cast<size_t>(a_col)],
                   rows[r][static_cast<size_t>(s_col)]});
  }
  return out;
}

std::vector<RawExample> ingest_jsonl(const std::string& text,
                                     const std::string& article_field,
                                     const std::string& summary_field) {
  std::vector<RawExample> out;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++line_no;
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail("jsonl: invalid JSON at line ", line_no);
    for (const auto& field : {article_field, summary_field}) {
      if (!j.contains(field))
        fail("jsonl: missing field '", field, "' at line ", line_no);
      if (!j[field].is_string())
        fail("jsonl: field '", field, "' at line ", line_no, " is not a string");
    }
    out.push_back({j[article_field].get<std::string>(),
                   j[summary_field].get<std::string>()});
  }
  return out;
}

}  // namespace

std::vector<RawExample> ingest(const std::string& path, CorpusFormat format,
                               const std::string& article_field,
                               const std::string& summary_field) {
  const std::string text = read_file(path);
  return format == CorpusFormat::kCsv
             ? ingest_csv(text, article_field, summary_field)
             : ingest_jsonl(text, article_field, summary_field);
}

SplitManifest split_dataset(int n_examples, const std::array<double, 3>& ratios,
                            uint64_t seed) {
  if (n_examples < 3) fail("split: need at least 3 examples, got ", n_examples);
  double sum = 0;
  for (double r : ratios) {
    if (r <= 0) fail("split: ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("split: ratios sum to ", sum, ", expected 1");

  std::vector<int> ids(static_cast<size_t>(n_examples));
  for (int i = 0; i < n_examples; ++i) ids[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(ids);

  const auto n_train = static_cast<size_t>(std::floor(ratios[0] * n_examples));
  const auto n_val = static_cast<size_t>(std::floor(ratios[1] * n_examples));

  SplitManifest m;
  m.seed = seed;
  m.ratios = ratios;
  m.train.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
  m.validation.assign(ids.begin() + static_cast<long>(n_train),
                      ids.begin() + static_cast<long>(n_train + n_val));
  m.test.assign(ids.begin() + static_cast<long>(n_train + n_val), ids.end());
  return m;
}

std::string SplitManifest::to_json() const {
  json j;
  j["seed"] = seed;
  j["ratios"] = ratios;
  j["train"] = train;
  j["validation"] = validation;
  j["test"] = test;
  return j.dump(2) + "\n";
}

SplitManifest SplitManifest::from_json(const std::string& text) {
  json j = json::parse(text);
  SplitManifest m;
  m.seed = j.at("seed").get<uint64_t>();
  m.ratios = j.at("ratios").get<std::array<double, 3>>();
  m.train = j.at("train").get<std::vector<int>>();
  m.validation = j.at("validation").get<std::vector<int>>();
  m.test = j.at("test").get<std::vector<int>>();
  return m;
}

void SplitManifest::save(const std::string& path) const {
  write_file_atomic(path, to_json());
}

SplitManifest SplitManifest::load(const std::string& path) {
  return from_json(read_file(path));
}

std::vector<Batch> make_batches(const std::vector<EncodedExample>& examples,
                                int batch_size) {
  if (batch_size < 1) fail("batch: batch_size must be >= 1");
  std::vector<Batch> out;
  for (size_t start = 0; start < examples.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(examples.size(), start + static_cast<size_t>(batch_size));
    size_t max_a = 0, max_s = 0;
    for (size_t i = start; i < end; ++i) {
      max_a = std::max(max_a, examples[i].article_ids.size());
      max_s = std::max(max_s, examples[i].summary_input_ids.size());
    }
    Batch b;
    for (size_t i = start; i < end; ++i) {
      const EncodedExample& ex = examples[i];
      auto pad = [](std::vector<int> v, size_t len, int fill) {
        v.resize(len, fill);
        return v;
      };
      auto mask_of = [](size_t real, size_t len) {
        std::vector<int> m(len, 0);
        std::fill(m.begin(), m.begin() + static_cast<long>(real), 1);
        return m;
      };
      b.article_ids.push_back(pad(ex.article_ids, max_a, Vocabulary::kPad));
      b.article_extended_ids.push_back(pad(ex.article_extended_ids, max_a, Vocabulary::kPad));
      b.article_mask.push_back(mask_of(ex.article_ids.size(), max_a));
      b.summary_input_ids.push_back(pad(ex.summary_input_ids, max_s, Vocabulary::kPad));
      b.summary_target_extended_ids.push_back(
          pad(ex.summary_target_extended_ids, max_s, Vocabulary::kPad));
      b.summary_mask.push_back(mask_of(ex.summary_input_ids.size(), max_s));
      b.oov_words.push_back(ex.oov_words);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::string corpus_to_jsonl(const std::vector<RawExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    json j;
    j["article"] = ex.article;
    j["summary"] = ex.summary;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RawExample> corpus_from_jsonl(const std::string& text) {
  std::vector<RawExample> out;
  size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++line_no;
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("article") || !j.contains("summary"))
      fail("corpus: invalid canonical line ", line_no);
    out.push_back({j["article"].get<std::string>(), j["summary"].get<std::string>()});
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<RawExample>& examples) {
  write_file_atomic(path, corpus_to_jsonl(examples));
}

std::vector<RawExample> load_corpus(const std::string& path) {
  return corpus_from_jsonl(read_file(path));
}

}  // namespace pgnet
