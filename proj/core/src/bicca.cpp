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

#include "cslm/bicca.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {
namespace {

// Non-reserved id of a word, or -1.
int lookup_regular(const Vocabulary& v, const std::string& w) {
  auto id = v.lookup(w);
  if (!id || v.is_reserved(*id)) return -1;
  return *id;
}

Eigen::VectorXd unit_row(const EmbeddingMatrix& emb, int id) {
  auto row = emb.input_row(id);
  Eigen::VectorXd v(row.size());
  for (std::size_t d = 0; d < row.size(); ++d) v[d] = row[d];
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

// Inverse square root of a symmetric positive definite matrix. Requires the
// spectrum to be safely positive; callers add ridge before getting here.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& s, bool ridged,
                             const char* name) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error(std::string("eigendecomposition failed for ") +
                             name);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (!(lambda_max > 0.0))
    throw std::runtime_error(std::string(name) +
                             " covariance has no positive spectrum");
  Eigen::VectorXd inv(lambda.size());
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda[i] <= lambda_max * 1e-12) {
      if (!ridged)
        throw std::runtime_error(
            std::string(name) +
            " covariance is degenerate; fit with ridge > 0");
      inv[i] = 1.0 / std::sqrt(lambda_max * 1e-12);
    } else {
      inv[i] = 1.0 / std::sqrt(lambda[i]);
    }
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_pairs(
    const TranslationLexicon& lexicon, const EmbeddingMatrix& emb_ar,
    const EmbeddingMatrix& emb_en) {
  std::vector<std::pair<int, int>> ids;
  std::set<std::pair<int, int>> seen;
  for (const auto& [ar, en] : lexicon.pairs) {
    auto ia = emb_ar.vocab().lookup(ar);
    auto ie = emb_en.vocab().lookup(en);
    if (!ia || !ie) continue;
    if (emb_ar.vocab().is_reserved(*ia) || emb_en.vocab().is_reserved(*ie))
      continue;
    if (seen.insert({*ia, *ie}).second) ids.emplace_back(*ia, *ie);
  }
  if (ids.size() < 2)
    throw std::runtime_error(
        "need at least 2 in-vocabulary lexicon pairs, found " +
        std::to_string(ids.size()));
  Eigen::MatrixXd x(ids.size(), emb_ar.dim());
  Eigen::MatrixXd y(ids.size(), emb_en.dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x.row(i) = unit_row(emb_ar, ids[i].first).transpose();
    y.row(i) = unit_row(emb_en, ids[i].second).transpose();
  }
  return {x, y};
}

CcaModel cca_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                 double k_fraction, double ridge) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::runtime_error("cca_fit expects equal-shaped views");
  const long n = x.rows();
  const long d = x.cols();
  if (n < 2) throw std::runtime_error("cca_fit needs at least 2 rows");
  if (!(k_fraction > 0.0 && k_fraction <= 1.0))
    throw std::runtime_error("k_fraction must be in (0, 1]");
  if (ridge < 0.0) throw std::runtime_error("ridge must be >= 0");
  if (!x.allFinite() || !y.allFinite())
    throw std::runtime_error("cca_fit input has non-finite values");

  CcaModel model;
  model.k_fraction = k_fraction;
  model.mean_x = x.colwise().mean();
  model.mean_y = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - model.mean_x.transpose();
  const Eigen::MatrixXd yc = y.rowwise() - model.mean_y.transpose();

  const double scale = 1.0 / static_cast<double>(n - 1);
  Eigen::MatrixXd sxx = (xc.transpose() * xc) * scale;
  Eigen::MatrixXd syy = (yc.transpose() * yc) * scale;
  const Eigen::MatrixXd sxy = (xc.transpose() * yc) * scale;
  if (ridge > 0.0) {
    sxx += (ridge * sxx.trace() / d) * Eigen::MatrixXd::Identity(d, d);
    syy += (ridge * syy.trace() / d) * Eigen::MatrixXd::Identity(d, d);
  }

  const Eigen::MatrixXd wx = inverse_sqrt(sxx, ridge > 0.0, "X");
  const Eigen::MatrixXd wy = inverse_sqrt(syy, ridge > 0.0, "Y");
  const Eigen::MatrixXd m = wx * sxy * wy;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);

  const int k = static_cast<int>(std::ceil(k_fraction * d));
  model.proj_x = wx * svd.matrixU().leftCols(k);
  model.proj_y = wy * svd.matrixV().leftCols(k);
  model.correlations =
      svd.singularValues().head(k).cwiseMin(1.0).cwiseMax(0.0);
  return model;
}

EmbeddingMatrix project(const EmbeddingMatrix& emb, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& proj,
                        const Eigen::VectorXd& component_scale) {
  if (mean.size() != emb.dim() || proj.rows() != emb.dim())
    throw std::runtime_error("projection dimensions do not match embedding");
  const int k = static_cast<int>(proj.cols());
  EmbeddingMatrix out(emb.vocab(), k, /*with_output=*/false);
  for (int id = 0; id < emb.rows(); ++id) {
    Eigen::VectorXd u = unit_row(emb, id);
    Eigen::VectorXd p = proj.transpose() * (u - mean);
    if (component_scale.size() == k) p = p.cwiseProduct(component_scale);
    auto dst = out.input_row(id);
    for (int c = 0; c < k; ++c) dst[c] = p[c];
  }
  return out;
}

EmbeddingMatrix merge_projected_spaces(const EmbeddingMatrix& proj_ar,
                                       const EmbeddingMatrix& proj_en) {
  if (proj_ar.dim() != proj_en.dim())
    throw std::runtime_error("projected spaces have different dimensions");
  const int dim = proj_ar.dim();
  const Vocabulary& va = proj_ar.vocab();
  const Vocabulary& ve = proj_en.vocab();

  std::unordered_map<std::string, std::int64_t> pooled;
  for (int id = 0; id < va.size(); ++id)
    if (!va.is_reserved(id)) pooled[va.word(id)] += va.count(id);
  for (int id = 0; id < ve.size(); ++id)
    if (!ve.is_reserved(id)) pooled[ve.word(id)] += ve.count(id);
  std::vector<std::pair<std::string, std::int64_t>> merged(pooled.begin(),
                                                           pooled.end());
  std::sort(merged.begin(), merged.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  Vocabulary vocab;
  for (auto& [w, c] : merged) vocab.add(w, c);
  vocab.add(Vocabulary::kSentenceStart, 0);
  vocab.add(Vocabulary::kSentenceEnd, 0);
  vocab.add(Vocabulary::kUnknown, 0);

  EmbeddingMatrix out(vocab, dim, /*with_output=*/false);
  for (int id = 0; id < vocab.size(); ++id) {
    if (vocab.is_reserved(id)) continue;
    const std::string& w = vocab.word(id);
    const LanguageTag tag = tag_language(w);
    const int row_ar = lookup_regular(va, w);
    const int row_en = lookup_regular(ve, w);
    bool use_arabic = row_ar >= 0;
    if (row_ar >= 0 && row_en >= 0) {
      if (tag == LanguageTag::kArabic) {
        use_arabic = true;
      } else if (tag == LanguageTag::kEnglish) {
        use_arabic = false;
      } else {
        // ties go to the Arabic side for determinism
        use_arabic = va.count(row_ar) >= ve.count(row_en);
      }
    }
    auto src =
        use_arabic ? proj_ar.input_row(row_ar) : proj_en.input_row(row_en);
    std::copy_n(src.begin(), dim, out.input_row(id).begin());
  }
  return out;
}

EmbeddingMatrix train_bicca(const Corpus& text,
                            const std::vector<AlignedSentencePair>& parallel,
                            const TranslationLexicon& lexicon,
                            const TrainConfig& base_cfg,
                            const BiccaConfig& cca_cfg) {
  if (base_cfg.model == EmbedModel::kSkipgramNs)
    throw std::runtime_error("bicca trains CbowNs or SkipgramHs spaces");
  Corpus parallel_text;
  parallel_text.origin = "parallel";
  for (const auto& p : parallel) {
    parallel_text.sentences.push_back(p.src);
    parallel_text.sentences.push_back(p.tgt);
  }
  Corpus both = detail::concat_corpora({&text, &parallel_text}, "bicca-pool");
  Corpus arabic_side = select_sentences(
      both, {SentenceKind::kMonoArabic, SentenceKind::kCodeSwitched});
  Corpus english_side = select_sentences(
      both, {SentenceKind::kMonoEnglish, SentenceKind::kCodeSwitched});

  SplitMix64 seeder(base_cfg.seed);
  TrainConfig cfg_ar = base_cfg;
  cfg_ar.seed = seeder.next();
  TrainConfig cfg_en = base_cfg;
  cfg_en.seed = seeder.next();
  EmbeddingMatrix emb_ar = train_mono(arabic_side, cfg_ar);
  EmbeddingMatrix emb_en = train_mono(english_side, cfg_en);

  auto [x, y] = assemble_pairs(lexicon, emb_ar, emb_en);
  CcaModel model = cca_fit(x, y, cca_cfg.k_fraction, cca_cfg.ridge);
  const Eigen::VectorXd scale =
      cca_cfg.scale_by_correlation ? model.correlations : Eigen::VectorXd{};
  EmbeddingMatrix proj_ar = project(emb_ar, model.mean_x, model.proj_x, scale);
  EmbeddingMatrix proj_en = project(emb_en, model.mean_y, model.proj_y, scale);
  return merge_projected_spaces(proj_ar, proj_en);
}

EmbeddingMatrix bicca_on_biskip(const EmbeddingMatrix& biskip_emb,
                                const TranslationLexicon& lexicon,
                                const BiccaConfig& cca_cfg) {
  // Split the shared table into per-language views; Other-tagged words
  // (digits, punctuation) belong to both views and the merge resolves them.
  const Vocabulary& vocab = biskip_emb.vocab();
  Vocabulary vocab_ar, vocab_en;
  std::vector<int> rows_ar, rows_en;
  for (int id = 0; id < vocab.size(); ++id) {
    if (vocab.is_reserved(id)) continue;
    const LanguageTag tag = tag_language(vocab.word(id));
    if (tag != LanguageTag::kEnglish) {
      vocab_ar.add(vocab.word(id), vocab.count(id));
      rows_ar.push_back(id);
    }
    if (tag != LanguageTag::kArabic) {
      vocab_en.add(vocab.word(id), vocab.count(id));
      rows_en.push_back(id);
    }
  }
  const auto finish = [&](Vocabulary& v) {
    v.add(Vocabulary::kSentenceStart, 0);
    v.add(Vocabulary::kSentenceEnd, 0);
    v.add(Vocabulary::kUnknown, 0);
  };
  finish(vocab_ar);
  finish(vocab_en);
  if (vocab_ar.regular_size() == 0 || vocab_en.regular_size() == 0)
    throw std::runtime_error(
        "biskip table does not contain words of both languages");

  const int dim = biskip_emb.dim();
  EmbeddingMatrix view_ar(vocab_ar, dim, false);
  EmbeddingMatrix view_en(vocab_en, dim, false);
  for (std::size_t i = 0; i < rows_ar.size(); ++i)
    std::copy_n(biskip_emb.input_row(rows_ar[i]).begin(), dim,
                view_ar.input_row(static_cast<int>(i)).begin());
  for (std::size_t i = 0; i < rows_en.size(); ++i)
    std::copy_n(biskip_emb.input_row(rows_en[i]).begin(), dim,
                view_en.input_row(static_cast<int>(i)).begin());

  auto [x, y] = assemble_pairs(lexicon, view_ar, view_en);
  CcaModel model = cca_fit(x, y, cca_cfg.k_fraction, cca_cfg.ridge);
  const Eigen::VectorXd scale =
      cca_cfg.scale_by_correlation ? model.correlations : Eigen::VectorXd{};
  EmbeddingMatrix proj_ar = project(view_ar, model.mean_x, model.proj_x, scale);
  EmbeddingMatrix proj_en = project(view_en, model.mean_y, model.proj_y, scale);
  return merge_projected_spaces(proj_ar, proj_en);
}

}  // namespace cslm
