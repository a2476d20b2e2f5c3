#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace xlmimo {

// Independent random stream keyed by a tuple of integers, e.g.
// (seed, M, trial). Any stream can be regenerated in isolation from its key.
class KeyedStream {
 public:
  explicit KeyedStream(std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * key.size());
    for (std::uint64_t k : key) {
      words.push_back(static_cast<std::uint32_t>(k));
      words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  // Uniform in [0, 1) with 53 random bits; independent of the standard
  // library's distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xlmimo
