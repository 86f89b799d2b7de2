#include "pgnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pgnet/corpus.hpp"
#include "pgnet/subprocess.hpp"

namespace pgnet {

extern const char* kDefaultVerbList;  // generated from data/predicate_verbs.txt

Rouge2Score rouge2_f1(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference) {
  auto bigrams = [](const std::vector<std::string>& toks) {
    std::map<std::pair<std::string, std::string>, int> out;
    for (size_t i = 0; i + 1 < toks.size(); ++i) ++out[{toks[i], toks[i + 1]}];
    return out;
  };
  const auto cand = bigrams(candidate);
  const auto ref = bigrams(reference);

  int64_t overlap = 0, n_cand = 0, n_ref = 0;
  for (const auto& [bg, count] : cand) {
    n_cand += count;
    auto it = ref.find(bg);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  for (const auto& [bg, count] : ref) n_ref += count;

  Rouge2Score s;
  s.precision = n_cand > 0 ? static_cast<double>(overlap) / n_cand : 0.0;
  s.recall = n_ref > 0 ? static_cast<double>(overlap) / n_ref : 0.0;
  s.f1 = (s.precision + s.recall) > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

PredicateLexicon PredicateLexicon::builtin() {
  PredicateLexicon lex;
  std::istringstream in(kDefaultVerbList);
  std::string tok;
  while (in >> tok) lex.set_.insert(tok);
  return lex;
}

PredicateLexicon PredicateLexicon::from_file(const std::string& path) {
  PredicateLexicon lex;
  std::istringstream in(read_file(path));
  std::string tok;
  while (in >> tok) lex.set_.insert(tok);
  if (lex.set_.empty()) fail("lexicon: no tokens in ", path);
  return lex;
}

PredicateLexicon PredicateLexicon::from_tokens(const std::vector<std::string>& tokens) {
  PredicateLexicon lex;
  lex.set_.insert(tokens.begin(), tokens.end());
  return lex;
}

std::vector<FactTriple> extract_facts(const std::string& text,
                                      const PredicateLexicon& lexicon) {
  const std::vector<std::string> tokens = tokenize(text);

  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  for (const auto& tok : tokens) {
    if (tok == "." || tok == "!" || tok == "?") {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(tok);
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));

  std::vector<FactTriple> out;
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    size_t p = 0;
    while (p < sent.size() && !lexicon.contains(sent[p])) ++p;
    if (p == sent.size()) continue;
    size_t q = p;
    while (q < sent.size() && lexicon.contains(sent[q])) ++q;

    FactTriple t;
    t.arg1.assign(sent.begin(), sent.begin() + static_cast<long>(p));
    t.predicate.assign(sent.begin() + static_cast<long>(p),
                       sent.begin() + static_cast<long>(q));
    t.arg2.assign(sent.begin() + static_cast<long>(q), sent.end());
    t.sentence_index = static_cast<int>(s);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

std::string triple_to_tsv(const FactTriple& t) {
  return join(t.arg1, " ") + "\t" + join(t.predicate, " ") + "\t" + join(t.arg2, " ");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

}  // namespace

std::vector<FactTriple> extract_facts_external(const std::string& text,
                                               const std::string& command) {
  const ExecResult r = run_process(command, text);
  if (r.status != 0)
    fail("extractor adapter '", command, "' exited with status ", r.status,
         ": ", r.err);
  std::vector<FactTriple> out;
  const auto lines = split_lines(r.out);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> fields;
    size_t start = 0;
    for (size_t pos = 0; pos <= lines[i].size(); ++pos) {
      if (pos == lines[i].size() || lines[i][pos] == '\t') {
        fields.push_back(lines[i].substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (fields.size() != 3)
      fail("extractor adapter: line ", i + 1, " has ", fields.size(),
           " fields, expected 3");
    FactTriple t;
    t.arg1 = split_ws(fields[0]);
    t.predicate = split_ws(fields[1]);
    t.arg2 = split_ws(fields[2]);
    t.sentence_index = static_cast<int>(i);
    if (t.predicate.empty())
      fail("extractor adapter: line ", i + 1, " has an empty predicate");
    out.push_back(std::move(t));
  }
  return out;
}

FactEmbedding embed_fact_hashed(const FactTriple& triple, int width) {
  if (width < 1) fail("embed: width must be >= 1");
  FactEmbedding e;
  e.v.assign(static_cast<size_t>(width), 0.0);
  auto fold = [&](const std::vector<std::string>& toks) {
    for (const auto& tok : toks) {
      const uint64_t h = fnv1a64(tok);
      const size_t idx = static_cast<size_t>(h % static_cast<uint64_t>(width));
      e.v[idx] += ((h >> 32) & 1) ? 1.0 : -1.0;
    }
  };
  fold(triple.arg1);
  fold(triple.predicate);
  fold(triple.arg2);

  double norm = 0;
  for (double x : e.v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0) {
    e.v[0] = 1.0;  // fixed unit fallback
  } else {
    for (double& x : e.v) x /= norm;
  }
  return e;
}

std::vector<FactEmbedding> embed_facts_external(const std::vector<FactTriple>& triples,
                                                const std::string& command,
                                                int width) {
  std::string input;
  for (const auto& t : triples) {
    input += triple_to_tsv(t);
    input += '\n';
  }
  const ExecResult r = run_process(command, input);
  if (r.status != 0)
    fail("embedder adapter '", command, "' exited with status ", r.status, ": ",
         r.err);
  const auto lines = split_lines(r.out);
  if (lines.size() != triples.size())
    fail("embedder adapter: ", lines.size(), " output lines for ",
         triples.size(), " triples");
  std::vector<FactEmbedding> out;
  for (size_t i = 0; i < lines.size(); ++i) {
    FactEmbedding e;
    std::istringstream is(lines[i]);
    double x;
    while (is >> x) e.v.push_back(x);
    if (static_cast<int>(e.v.size()) != width)
      fail("embedder adapter: line ", i + 1, " has ", e.v.size(),
           " values, expected ", width);
    out.push_back(std::move(e));
  }
  return out;
}

FactualScore factual_score(const std::vector<FactEmbedding>& generated,
                           const std::vector<FactEmbedding>& reference) {
  FactualScore s;
  if (generated.empty() || reference.empty()) {
    s.degenerate = true;
    return s;
  }

  auto cosine = [](const FactEmbedding& a, const FactEmbedding& b) {
    if (a.v.size() != b.v.size())
      fail("factual_score: embedding widths differ (", a.v.size(), " vs ",
           b.v.size(), ")");
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.v.size(); ++i) {
      dot += a.v[i] * b.v[i];
      na += a.v[i] * a.v[i];
      nb += b.v[i] * b.v[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return std::max(0.0, dot / (std::sqrt(na) * std::sqrt(nb)));
  };

  double p = 0;
  for (const auto& g : generated) {
    double best = 0;
    for (const auto& r : reference) best = std::max(best, cosine(g, r));
    p += best;
  }
  double r = 0;
  for (const auto& ref : reference) {
    double best = 0;
    for (const auto& g : generated) best = std::max(best, cosine(g, ref));
    r += best;
  }
  s.precision = p / static_cast<double>(generated.size());
  s.recall = r / static_cast<double>(reference.size());
  s.f1 = (s.precision + s.recall) > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) fail("aggregate: empty value list");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  Aggregate a;
  a.min = sorted.front();
  a.max = sorted.back();
  double sum = 0;
  for (double x : sorted) sum += x;
  a.mean = sum / static_cast<double>(sorted.size());
  const size_t n = sorted.size();
  a.median = (n % 2 == 1) ? sorted[n / 2]
                          : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return a;
}

namespace {

std::vector<FactTriple> facts_of(const std::string& text,
                                 const MetricBackends& backends) {
  if (backends.extractor == "builtin") {
    const PredicateLexicon lex = backends.lexicon_path.empty()
                                     ? PredicateLexicon::builtin()
                                     : PredicateLexicon::from_file(backends.lexicon_path);
    return extract_facts(text, lex);
  }
  if (backends.extractor.rfind("exec:", 0) == 0)
    return extract_facts_external(text, backends.extractor.substr(5));
  fail("unknown extractor '", backends.extractor, "' (builtin or exec:COMMAND)");
}

std::vector<FactEmbedding> embeddings_of(const std::vector<FactTriple>& triples,
                                         const MetricBackends& backends) {
  if (backends.embedder == "hashed") {
    std::vector<FactEmbedding> out;
    out.reserve(triples.size());
    for (const auto& t : triples)
      out.push_back(embed_fact_hashed(t, backends.embed_width));
    return out;
  }
  if (backends.embedder.rfind("exec:", 0) == 0) {
    if (triples.empty()) return {};
    return embed_facts_external(triples, backends.embedder.substr(5),
                                backends.embed_width);
  }
  fail("unknown embedder '", backends.embedder, "' (hashed or exec:COMMAND)");
}

}  // namespace

ExampleScores score_example(const std::string& id, const std::string& candidate,
                            const std::string& reference,
                            const MetricBackends& backends) {
  ExampleScores s;
  s.id = id;
  s.rouge = rouge2_f1(tokenize(candidate), tokenize(reference));
  s.fact = factual_score(embeddings_of(facts_of(candidate, backends), backends),
                         embeddings_of(facts_of(reference, backends), backends));
  return s;
}

std::string scores_to_csv(const std::vector<ExampleScores>& scores) {
  std::string out = "id,rouge2_p,rouge2_r,rouge2_f1,fact_p,fact_r,fact_f1\n";
  for (const auto& s : scores) {
    out += s.id;
    for (double x : {s.rouge.precision, s.rouge.recall, s.rouge.f1,
                     s.fact.precision, s.fact.recall, s.fact.f1}) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

std::vector<ExampleScores> scores_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "id,rouge2_p,rouge2_r,rouge2_f1,fact_p,fact_r,fact_f1")
    fail("scores: missing or unexpected CSV header");
  std::vector<ExampleScores> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields;
    size_t start = 0;
    for (size_t pos = 0; pos <= lines[i].size(); ++pos) {
      if (pos == lines[i].size() || lines[i][pos] == ',') {
        fields.push_back(lines[i].substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (fields.size() != 7) fail("scores: row ", i + 1, " has ", fields.size(), " fields");
    ExampleScores s;
    s.id = fields[0];
    s.rouge.precision = std::stod(fields[1]);
    s.rouge.recall = std::stod(fields[2]);
    s.rouge.f1 = std::stod(fields[3]);
    s.fact.precision = std::stod(fields[4]);
    s.fact.recall = std::stod(fields[5]);
    s.fact.f1 = std::stod(fields[6]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string aggregate_to_json(const std::vector<ExampleScores>& scores) {
  if (scores.empty()) fail("aggregate: no scores");
  auto column = [&](auto getter) {
    std::vector<double> v;
    v.reserve(scores.size());
    for (const auto& s : scores) v.push_back(getter(s));
    return aggregate(v);
  };
  auto block = [](const Aggregate& a) {
    nlohmann::json j;
    j["min"] = a.min;
    j["median"] = a.median;
    j["mean"] = a.mean;
    j["max"] = a.max;
    return j;
  };
  nlohmann::json j;
  j["rouge2_f1"] = block(column([](const ExampleScores& s) { return s.rouge.f1; }));
  j["rouge2_p"] = block(column([](const ExampleScores& s) { return s.rouge.precision; }));
  j["rouge2_r"] = block(column([](const ExampleScores& s) { return s.rouge.recall; }));
  j["fact_f1"] = block(column([](const ExampleScores& s) { return s.fact.f1; }));
  j["fact_p"] = block(column([](const ExampleScores& s) { return s.fact.precision; }));
  j["fact_r"] = block(column([](const ExampleScores& s) { return s.fact.recall; }));
  j["n_examples"] = scores.size();
  return j.dump(2) + "\n";
}

}  // namespace pgnet
