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

#ifndef FEDTAB_DEMO_DATA_H_
#define FEDTAB_DEMO_DATA_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "fedtab/table.h"

namespace fedtab {

// Labelled mixed-type table: class c is uniform over `num_classes`; each
// continuous feature is N(separation * mean_c, 1) with class means spread on
// a fixed pattern, every second continuous feature adds a second mode at
// +6 for half the rows, and each discrete feature takes the class-matched
// token with probability `discrete_signal` and a uniform token otherwise.
struct DemoDataSpec {
  size_t rows = 3000;
  int num_classes = 3;
  int num_continuous = 4;
  int num_discrete = 2;
  int categories = 3;
  double separation = 1.0;
  double discrete_signal = 0.5;
  uint64_t seed = 0;
};

absl::StatusOr<Table> MakeDemoTable(const DemoDataSpec& spec);

// Three-class Gaussian table with equicorrelated continuous features
// (correlation `rho`, unit variances). Only feature x0 carries the class
// shift separation * (c - 1), so a good linear rule has to contrast x0 with
// the other features. Classes c0, c1, c2 have prior weights 0.25, 0.35, 0.40.
struct CorrelatedClassSpec {
  size_t rows = 3000;
  int num_features = 2;
  double rho = 0.9;
  double separation = 0.7;
  uint64_t seed = 0;
};

absl::StatusOr<Table> MakeCorrelatedClassTable(const CorrelatedClassSpec& spec);

}  // namespace fedtab

#endif  // FEDTAB_DEMO_DATA_H_
