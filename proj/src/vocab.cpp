#include "pgnet/vocab.hpp"

#include <algorithm>
#include <map>

namespace pgnet {

Vocabulary::Vocabulary() {
  push_token("[PAD]");
  push_token("[UNK]");
  push_token("[START]");
  push_token("[STOP]");
}

void Vocabulary::push_token(const std::string& token) {
  token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& streams,
                             int max_size) {
  if (max_size <= kNumReserved)
    fail("build_vocab: max_size must exceed ", kNumReserved, ", got ", max_size);

  // std::map keeps candidates in lexicographic order, which settles frequency
  // ties without a second pass.
  std::map<std::string, int64_t> counts;
  for (const auto& stream : streams)
    for (const auto& tok : stream) ++counts[tok];
  for (int id = 0; id < kNumReserved; ++id) counts.erase(Vocabulary().token(id));

  std::vector<std::pair<std::string, int64_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  const size_t capacity = static_cast<size_t>(max_size - kNumReserved);
  for (size_t i = 0; i < order.size() && i < capacity; ++i)
    v.push_token(order[i].first);
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) > 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    fail("vocab: id ", id, " out of range [0, ", size(), ")");
  return id_to_token_[static_cast<size_t>(id)];
}

uint64_t Vocabulary::hash() const { return fnv1a64(to_text()); }

std::string Vocabulary::to_text() const {
  std::string out;
  for (int id = kNumReserved; id < size(); ++id) {
    out += id_to_token_[static_cast<size_t>(id)];
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::from_text(const std::string& text) {
  Vocabulary v;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string tok = text.substr(pos, nl - pos);
    if (!tok.empty() && tok.back() == '\r') tok.pop_back();
    if (!tok.empty()) {
      if (v.contains(tok)) fail("vocab: duplicate token '", tok, "'");
      v.push_token(tok);
    }
    pos = nl + 1;
  }
  return v;
}

void Vocabulary::save(const std::string& path) const {
  write_file_atomic(path, to_text());
}

Vocabulary Vocabulary::load(const std::string& path) {
  return from_text(read_file(path));
}

}  // namespace pgnet
