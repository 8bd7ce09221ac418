#pragma once

#include <cstdint>
#include <random>

namespace qlockin {

// splitmix64 step; used to derive well-mixed per-stream seeds from a master
// seed so that parallel ensembles are reproducible independent of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed for named stream `stream` under `master`. Streams are independent for
// distinct stream ids and identical across runs and thread counts.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace qlockin
