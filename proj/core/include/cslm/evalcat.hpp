// Copyright 2026 The CSLM Authors
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

#ifndef CSLM_EVALCAT_HPP_
#define CSLM_EVALCAT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cslm/corpus.hpp"
#include "cslm/embedding.hpp"

namespace cslm {

struct ClusterResult {
  std::vector<int> assignment;      // item -> cluster id in 0..n-1
  double i2 = 0.0;                  // sum over clusters of |sum of unit vectors|
  std::vector<double> i2_history;   // i2 after bisection, then per sweep
};

// Divisive spherical clustering: unit-normalize, repeatedly bisect the
// cluster whose best cosine 2-means split gains the most I2 (10 restarts
// per split), then refine by single-item moves while I2 improves (up to
// max_sweeps passes). Deterministic per seed.
ClusterResult repeated_bisection_cluster(
    const std::vector<std::vector<double>>& vectors, int n, std::uint64_t seed,
    int restarts = 10, int max_sweeps = 20);

// purity = (1/N) sum over clusters of the largest gold-label overlap.
// Labels must be >= 0; a negative label means a missing gold entry and
// throws.
double purity(const std::vector<int>& assignment,
              const std::vector<int>& gold_labels);

enum class CatMode { kArabicOnly, kEnglishOnly, kBilingual };

struct CategorizationReport {
  CatMode mode;
  double purity = 0.0;
  int items = 0;
  int categories = 0;
};

// Clusters the gold words found in the embedding (restricted by mode's
// language tags) into as many groups as there are surviving categories and
// scores purity against the gold partition.
CategorizationReport run_categorization(const EmbeddingMatrix& emb,
                                        const GoldPartition& gold,
                                        CatMode mode, std::uint64_t seed);

// The overall monolingual score is the mean of the two monolingual
// purities.
inline double overall_monolingual(double purity_ar, double purity_en) {
  return 0.5 * (purity_ar + purity_en);
}

const char* cat_mode_name(CatMode mode);

}  // namespace cslm

#endif  // CSLM_EVALCAT_HPP_
