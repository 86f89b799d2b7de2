#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgnet {

// All operational failures surface as PgnetError with a human-readable message.
class PgnetError : public std::runtime_error {
 public:
  explicit PgnetError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline void concat_into(std::ostringstream&) {}
template <typename A, typename... Rest>
void concat_into(std::ostringstream& os, const A& a, const Rest&... rest) {
  os << a;
  concat_into(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string strcat(const Args&... args) {
  std::ostringstream os;
  detail::concat_into(os, args...);
  return os.str();
}

template <typename... Args>
[[noreturn]] void fail(const Args&... args) {
  throw PgnetError(strcat(args...));
}

// Deterministic RNG with portable draws. mt19937_64 is bit-stable across
// platforms; the distributions below avoid std:: distribution objects, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is irrelevant at these ranges.
  uint64_t below(uint64_t n) { return gen_() % n; }

  double normal() {
    // Box-Muller; two draws per call keeps the stream layout simple.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);
std::string to_hex(uint64_t x);

// Shortest round-trip decimal rendering of a double.
std::string format_double(double x);

std::string read_file(const std::string& path);
// Writes to path + ".tmp" then renames, so partial output never lands
// under the final name.
void write_file_atomic(const std::string& path, const std::string& content);

std::vector<std::string> split_ws(const std::string& s);
std::string join(const std::vector<std::string>& tokens, const std::string& sep);

}  // namespace pgnet
