#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace propinf {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; the basis for all seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a master seed and a path of
/// integer parts, e.g. derive_seed(master, {kTrialTag, repetition, trial}).
/// The mapping is stable across runs and platforms.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> parts);

Rng make_rng(std::uint64_t seed);

/// Uniform double in [0, 1) with 53-bit resolution. Hand-rolled so the
/// produced stream does not depend on the standard library implementation.
double uniform01(Rng& rng);

bool bernoulli(Rng& rng, double p);

/// Unbiased integer in [0, n). n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal via Box-Muller (no state carried between calls).
double normal01(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index.
template <class T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::uint64_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace propinf
