#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grok/rng.hpp"

namespace grok {

// One modular-addition example: tokens (a, b, =) with label (a+b) mod p.
// The "=" token always has index p.
struct Sample {
  int a = 0;
  int b = 0;
  int eq = 0;
  int label = 0;
};

struct SplitDataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
  int p = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

// All p^2 ordered pairs in canonical a-major order.
inline std::vector<Sample> generate_all(int p) {
  if (p < 2) throw std::invalid_argument("generate_all: p must be >= 2");
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(p) * p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) samples.push_back({a, b, p, (a + b) % p});
  return samples;
}

// Seeded Fisher-Yates shuffle over the canonical ordering, then a prefix
// split with |train| = floor(fraction * p^2).
inline SplitDataset split(const std::vector<Sample>& samples, int p, double fraction,
                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split: fraction must be in (0, 1)");
  std::vector<Sample> shuffled = samples;
  RngStream rng(seed);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const std::size_t j = rng.bounded(i);
    std::swap(shuffled[i - 1], shuffled[j]);
  }
  const std::size_t n_train =
      static_cast<std::size_t>(fraction * static_cast<double>(shuffled.size()));
  if (n_train == 0 || n_train == shuffled.size())
    throw std::invalid_argument("split: empty train or test split");
  SplitDataset ds;
  ds.p = p;
  ds.fraction = fraction;
  ds.seed = seed;
  ds.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  return ds;
}

inline SplitDataset make_split(int p, double fraction, std::uint64_t seed) {
  return split(generate_all(p), p, fraction, seed);
}

// CSV dump (a,b,label,split) for external inspection.
inline void export_split_csv(const SplitDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_split_csv: cannot open " + path);
  out << "a,b,label,split\n";
  for (const Sample& s : ds.train) out << s.a << ',' << s.b << ',' << s.label << ",train\n";
  for (const Sample& s : ds.test) out << s.a << ',' << s.b << ',' << s.label << ",test\n";
  if (!out) throw std::runtime_error("export_split_csv: write failed for " + path);
}

}  // namespace grok
