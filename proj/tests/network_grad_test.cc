// Copyright 2026 The CCGVAE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "gradcheck_suites.h"

namespace ccgvae {
namespace {

using testing::kGradTolerance;

TEST(NetworkGradients, EveryCompositeNetworkMatchesCentralDifferences) {
  Rng rng(2024);
  for (const auto& check : testing::networkGradChecks()) {
    const auto r = testing::worstOver(check, rng);
    EXPECT_LE(r.max_rel_error, kGradTolerance) << check.name << ": " << r.worst;
  }
}

TEST(NetworkGradients, PrimitiveSuiteMatchesCentralDifferences) {
  Rng rng(2025);
  for (const auto& check : testing::primitiveGradChecks()) {
    const auto r = testing::worstOver(check, rng);
    EXPECT_LE(r.max_rel_error, kGradTolerance) << check.name << ": " << r.worst;
  }
}

}  // namespace
}  // namespace ccgvae
