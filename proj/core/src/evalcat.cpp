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

#include "cslm/evalcat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {
namespace {

using Vec = std::vector<double>;

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void add_to(Vec& acc, const Vec& v, double sign) {
  for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += sign * v[d];
}

double dot_vec(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

struct Split {
  double gain = -std::numeric_limits<double>::infinity();
  std::vector<int> left, right;
};

// Best cosine 2-means split of one cluster over `restarts` seeded starts.
Split best_bisection(const std::vector<Vec>& points,
                     const std::vector<int>& members, double cluster_norm,
                     int restarts, SplitMix64& rng) {
  Split best;
  const std::size_t m = members.size();
  if (m < 2) return best;
  const std::size_t dim = points[members[0]].size();
  for (int r = 0; r < restarts; ++r) {
    std::size_t s1 = rng.next_below(m);
    std::size_t s2 = rng.next_below(m - 1);
    if (s2 >= s1) ++s2;
    Vec c1 = points[members[s1]];
    Vec c2 = points[members[s2]];
    std::vector<char> side(m, 0);
    for (int iter = 0; iter < 50; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        const Vec& p = points[members[i]];
        const char want = dot_vec(p, c1) >= dot_vec(p, c2) ? 0 : 1;
        if (want != side[i]) {
          side[i] = want;
          changed = true;
        }
      }
      // Never leave a side empty: move the point with the weakest margin.
      for (char empty_side : {0, 1}) {
        if (std::count(side.begin(), side.end(), empty_side) == 0) {
          std::size_t weakest = 0;
          double weakest_margin = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < m; ++i) {
            const Vec& p = points[members[i]];
            const double margin = empty_side == 0
                                      ? dot_vec(p, c2) - dot_vec(p, c1)
                                      : dot_vec(p, c1) - dot_vec(p, c2);
            if (margin < weakest_margin) {
              weakest_margin = margin;
              weakest = i;
            }
          }
          side[weakest] = empty_side;
          changed = true;
        }
      }
      Vec sum1(dim, 0.0), sum2(dim, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        add_to(side[i] == 0 ? sum1 : sum2, points[members[i]], 1.0);
      const double n1 = norm(sum1), n2 = norm(sum2);
      if (n1 > 0) for (double& x : sum1) x /= n1;
      if (n2 > 0) for (double& x : sum2) x /= n2;
      c1 = std::move(sum1);
      c2 = std::move(sum2);
      if (!changed) break;
    }
    Vec sum1(dim, 0.0), sum2(dim, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      add_to(side[i] == 0 ? sum1 : sum2, points[members[i]], 1.0);
    const double gain = norm(sum1) + norm(sum2) - cluster_norm;
    if (gain > best.gain) {
      best.gain = gain;
      best.left.clear();
      best.right.clear();
      for (std::size_t i = 0; i < m; ++i)
        (side[i] == 0 ? best.left : best.right).push_back(members[i]);
    }
  }
  return best;
}

}  // namespace

ClusterResult repeated_bisection_cluster(
    const std::vector<std::vector<double>>& vectors, int n, std::uint64_t seed,
    int restarts, int max_sweeps) {
  const int total = static_cast<int>(vectors.size());
  if (n < 1) throw std::runtime_error("cluster count must be >= 1");
  if (n > total)
    throw std::runtime_error("cannot form " + std::to_string(n) +
                             " clusters from " + std::to_string(total) +
                             " vectors");
  if (total == 0) throw std::runtime_error("nothing to cluster");

  // Unit-normalize once; all similarity below is plain dot product.
  std::vector<Vec> points(total);
  for (int i = 0; i < total; ++i) {
    points[i] = vectors[i];
    const double nv = norm(points[i]);
    if (nv > 0)
      for (double& x : points[i]) x /= nv;
  }

  SplitMix64 rng(seed);
  std::vector<std::vector<int>> clusters(1);
  for (int i = 0; i < total; ++i) clusters[0].push_back(i);
  std::vector<Vec> sums(1, Vec(points[0].size(), 0.0));
  for (int i = 0; i < total; ++i) add_to(sums[0], points[i], 1.0);
  std::vector<Split> plans;
  plans.push_back(best_bisection(points, clusters[0], norm(sums[0]), restarts,
                                 rng));

  while (static_cast<int>(clusters.size()) < n) {
    int pick = -1;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (clusters[c].size() < 2) continue;
      if (pick < 0 || plans[c].gain > plans[pick].gain)
        pick = static_cast<int>(c);
    }
    if (pick < 0) throw std::runtime_error("no splittable cluster left");
    Split plan = std::move(plans[pick]);
    clusters[pick] = plan.left;
    clusters.push_back(plan.right);
    const auto recompute_sum = [&](const std::vector<int>& members) {
      Vec s(points[0].size(), 0.0);
      for (int i : members) add_to(s, points[i], 1.0);
      return s;
    };
    sums[pick] = recompute_sum(clusters[pick]);
    sums.push_back(recompute_sum(clusters.back()));
    plans[pick] = best_bisection(points, clusters[pick], norm(sums[pick]),
                                 restarts, rng);
    plans.push_back(best_bisection(points, clusters.back(),
                                   norm(sums.back()), restarts, rng));
  }

  ClusterResult result;
  result.assignment.assign(total, 0);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (int i : clusters[c]) result.assignment[i] = static_cast<int>(c);

  const auto total_i2 = [&]() {
    double s = 0.0;
    for (const auto& sum : sums) s += norm(sum);
    return s;
  };
  result.i2_history.push_back(total_i2());

  // Global refinement: move single items while I2 improves.
  std::vector<int> sizes(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c)
    sizes[c] = static_cast<int>(clusters[c].size());
  for (int sweep = 0; sweep < max_sweeps && n > 1; ++sweep) {
    bool moved = false;
    for (int i = 0; i < total; ++i) {
      const int src = result.assignment[i];
      if (sizes[src] <= 1) continue;  // clusters must stay non-empty
      Vec src_minus = sums[src];
      add_to(src_minus, points[i], -1.0);
      const double src_delta = norm(src_minus) - norm(sums[src]);
      int best_dst = -1;
      double best_gain = 1e-12;
      for (int dst = 0; dst < n; ++dst) {
        if (dst == src) continue;
        Vec dst_plus = sums[dst];
        add_to(dst_plus, points[i], 1.0);
        const double gain = src_delta + norm(dst_plus) - norm(sums[dst]);
        if (gain > best_gain) {
          best_gain = gain;
          best_dst = dst;
        }
      }
      if (best_dst >= 0) {
        add_to(sums[src], points[i], -1.0);
        add_to(sums[best_dst], points[i], 1.0);
        --sizes[src];
        ++sizes[best_dst];
        result.assignment[i] = best_dst;
        moved = true;
      }
    }
    result.i2_history.push_back(total_i2());
    if (!moved) break;
  }
  result.i2 = result.i2_history.back();
  return result;
}

double purity(const std::vector<int>& assignment,
              const std::vector<int>& gold_labels) {
  if (assignment.size() != gold_labels.size())
    throw std::runtime_error("assignment and gold labels differ in length");
  if (assignment.empty()) throw std::runtime_error("nothing to score");
  int clusters = 0, labels = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (gold_labels[i] < 0)
      throw std::runtime_error("item " + std::to_string(i) +
                               " has no gold label");
    clusters = std::max(clusters, assignment[i] + 1);
    labels = std::max(labels, gold_labels[i] + 1);
  }
  std::vector<std::vector<std::int64_t>> counts(
      clusters, std::vector<std::int64_t>(labels, 0));
  for (std::size_t i = 0; i < assignment.size(); ++i)
    ++counts[assignment[i]][gold_labels[i]];
  std::int64_t agree = 0;
  for (const auto& row : counts)
    agree += *std::max_element(row.begin(), row.end());
  return static_cast<double>(agree) / static_cast<double>(assignment.size());
}

const char* cat_mode_name(CatMode mode) {
  switch (mode) {
    case CatMode::kArabicOnly: return "arabic";
    case CatMode::kEnglishOnly: return "english";
    case CatMode::kBilingual: return "bilingual";
  }
  return "?";
}

CategorizationReport run_categorization(const EmbeddingMatrix& emb,
                                        const GoldPartition& gold,
                                        CatMode mode, std::uint64_t seed) {
  std::vector<std::vector<double>> items;
  std::vector<int> labels;
  int label = -1;
  int surviving = 0;
  for (const auto& [category, words] : gold.categories) {
    ++label;
    bool any = false;
    for (const auto& [word, tag] : words) {
      if (mode == CatMode::kArabicOnly && tag != LanguageTag::kArabic)
        continue;
      if (mode == CatMode::kEnglishOnly && tag != LanguageTag::kEnglish)
        continue;
      auto id = emb.vocab().lookup(word);
      if (!id || emb.vocab().is_reserved(*id)) continue;  // OOV gold words drop
      auto row = emb.input_row(*id);
      items.emplace_back(row.begin(), row.end());
      labels.push_back(label);
      any = true;
    }
    if (any) ++surviving;
  }
  if (surviving < 2)
    throw std::runtime_error(
        "concept categorization needs at least 2 surviving categories, got " +
        std::to_string(surviving));

  // Compact labels to 0..surviving-1 in first-appearance order.
  std::map<int, int> remap;
  for (int& l : labels) {
    auto [it, fresh] = remap.emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }

  ClusterResult clusters = repeated_bisection_cluster(items, surviving, seed);
  CategorizationReport report;
  report.mode = mode;
  report.items = static_cast<int>(items.size());
  report.categories = surviving;
  report.purity = purity(clusters.assignment, labels);
  return report;
}

}  // namespace cslm
