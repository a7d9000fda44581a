#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace msgwnn {

/// All randomness in the library flows from one master seed through named
/// streams, so every component draws from an independent, reproducible
/// sequence regardless of call order elsewhere.
///
/// derive_seed(master, "synth/sample/3") -> seed for that stream only.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
  // FNV-1a over the name, folded into the master seed, then one splitmix64
  // finalization step to decorrelate nearby seeds.
  std::uint64_t h = 14695981039346656037ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view name) {
  return std::mt19937_64(derive_seed(master, name));
}

}  // namespace msgwnn
