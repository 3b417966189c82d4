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

#ifndef CSLM_BICCA_HPP_
#define CSLM_BICCA_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "cslm/corpus.hpp"
#include "cslm/embed.hpp"
#include "cslm/embedding.hpp"

namespace cslm {

// Canonical correlation model between two vector spaces of equal dimension.
struct CcaModel {
  Eigen::VectorXd mean_x, mean_y;
  Eigen::MatrixXd proj_x, proj_y;  // d x k'
  Eigen::VectorXd correlations;    // k' values in [0,1], nonincreasing
  double k_fraction = 1.0;

  int components() const { return static_cast<int>(correlations.size()); }
};

// Stacks the unit-normalized vectors of the lexicon pairs whose both sides
// are in-vocabulary; duplicates contribute one row. Throws when fewer than
// two pairs survive.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_pairs(
    const TranslationLexicon& lexicon, const EmbeddingMatrix& emb_ar,
    const EmbeddingMatrix& emb_en);

// Mean-centers both views, whitens the auto-covariances (with a relative
// ridge of ridge*trace/d on each), and takes the SVD of the whitened
// cross-covariance. Keeps the top ceil(k_fraction * d) directions.
CcaModel cca_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                 double k_fraction, double ridge);

// Projects every row: unit-normalize, subtract the view mean, multiply by
// the projection. `component_scale` optionally reweights the canonical
// components (empty = no scaling).
EmbeddingMatrix project(const EmbeddingMatrix& emb, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& proj,
                        const Eigen::VectorXd& component_scale = {});

struct BiccaConfig {
  double k_fraction = 0.8;
  double ridge = 1e-8;
  bool scale_by_correlation = false;
};

// The full correlation-based pipeline: trains the Arabic space on the
// Arabic + code-switched sentences of the text and parallel corpora and the
// English space on the English + code-switched subsets, fits CCA on the
// lexicon pairs, projects both vocabularies and merges them into one table.
EmbeddingMatrix train_bicca(const Corpus& text,
                            const std::vector<AlignedSentencePair>& parallel,
                            const TranslationLexicon& lexicon,
                            const TrainConfig& base_cfg,
                            const BiccaConfig& cca_cfg);

// Splits an existing bilingual table by language tag into two views, then
// runs the CCA projection between them to pull translations closer.
EmbeddingMatrix bicca_on_biskip(const EmbeddingMatrix& biskip_emb,
                                const TranslationLexicon& lexicon,
                                const BiccaConfig& cca_cfg);

// Merges two projected spaces: Arabic-tagged words come from the Arabic
// space, English-tagged from the English space, Other-tagged words present
// in both resolve to the side where the word is more frequent.
EmbeddingMatrix merge_projected_spaces(const EmbeddingMatrix& proj_ar,
                                       const EmbeddingMatrix& proj_en);

}  // namespace cslm

#endif  // CSLM_BICCA_HPP_
