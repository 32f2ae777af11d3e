// Copyright 2026 The Fedtab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDTAB_RANDOM_H_
#define FEDTAB_RANDOM_H_

#include <cstdint>
#include <random>

namespace fedtab {

// SplitMix64 finalizer. Used to derive independent stream seeds from a
// (seed, index) pair so per-row and per-client streams are reproducible.
uint64_t MixSeed(uint64_t seed, uint64_t index);

// Seeded generator with portable sampling routines. The standard library's
// distributions are implementation-defined, which would make outputs differ
// between toolchains; everything here is derived from raw mt19937_64 words.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1), never returns 0.
  double UniformOpen();
  // Uniform on [lo, hi).
  double Uniform(double lo, double hi);
  // Uniform integer on [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);
  double Normal();
  // Natural log of a Gamma(shape, 1) draw. Working in log space keeps
  // small-shape draws (e.g. Dirichlet with concentration 0.05) from
  // underflowing to zero.
  double LogGamma(double shape);

  uint64_t NextWord() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace fedtab

#endif  // FEDTAB_RANDOM_H_
