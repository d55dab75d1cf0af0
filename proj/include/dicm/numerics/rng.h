/* Copyright 2026 The DICM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DICM_NUMERICS_RNG_H_
#define DICM_NUMERICS_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace dicm::numerics {

// Seeded generator whose output sequence is identical on every platform.
// std::mt19937_64 is fully specified by the standard; the distribution
// adaptors in <random> are not, so uniform/normal/shuffle are defined here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  double Uniform();                   // [0, 1), 53 bits
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Normal();                    // standard normal, Box-Muller
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  uint64_t UniformInt(uint64_t n);    // [0, n), unbiased
  bool Bernoulli(double p) { return Uniform() < p; }

  template <class T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a label.
uint64_t DeriveSeed(uint64_t seed, std::string_view label);
uint64_t DeriveSeed(uint64_t seed, uint64_t index);

// splitmix64 finalizer; a stable 64-bit mix.
uint64_t Mix64(uint64_t x);

}  // namespace dicm::numerics

#endif  // DICM_NUMERICS_RNG_H_
