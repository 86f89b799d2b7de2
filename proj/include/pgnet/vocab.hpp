#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "pgnet/util.hpp"

namespace pgnet {

// Fixed vocabulary with four reserved entries. Ids are dense in [0, size()).
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kStart = 2;
  static constexpr int kStop = 3;
  static constexpr int kNumReserved = 4;

  Vocabulary();

  // Keeps the max_size - 4 most frequent tokens across all streams, ties
  // broken lexicographically. Reserved tokens are never counted.
  static Vocabulary build(const std::vector<std::vector<std::string>>& streams,
                          int max_size);

  int id(const std::string& token) const;  // kUnk when absent
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(id_to_token_.size()); }

  // FNV-1a over all tokens in id order; pins checkpoints to their vocabulary.
  uint64_t hash() const;

  // One non-reserved token per line; line i holds the token with id 4 + i.
  std::string to_text() const;
  static Vocabulary from_text(const std::string& text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void push_token(const std::string& token);

  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace pgnet
