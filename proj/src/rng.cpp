#include "mtmlca/rng.hpp"

#include <unordered_map>

#include "mtmlca/errors.hpp"

namespace mtmlca {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(root);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("Rng::below requires a positive bound");
  // Rejection sampling over the largest multiple of bound.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::uint64_t> Rng::sample_without_replacement(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw ArgumentError("cannot sample more values than the population holds");
  // Sparse partial Fisher-Yates: only touched slots are stored.
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto slot = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::uint64_t> out;
  out.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + below(n - i);
    const std::uint64_t vi = slot(i);
    const std::uint64_t vj = slot(j);
    out.push_back(vj);
    swapped[j] = vi;
    swapped[i] = vj;
  }
  return out;
}

}  // namespace mtmlca
