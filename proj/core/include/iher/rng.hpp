#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace iher {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates seeds derived from (seed, stream, index).
inline std::uint64_t mix_bits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return mix_bits(mix_bits(mix_bits(a) ^ b) ^ c);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_bits(seed)); }

inline std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline Rng rng_from_string(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  return rng;
}

}  // namespace iher
