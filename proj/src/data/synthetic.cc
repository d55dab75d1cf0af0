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

#include "dicm/data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dicm/common/error.h"
#include "dicm/numerics/ops.h"
#include "dicm/numerics/rng.h"

namespace dicm::data {

using numerics::DeriveSeed;
using numerics::Rng;

void SyntheticConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synthetic data: " + what);
  };
  require(users >= 1 && items >= 1 && images >= 1 && categories >= 1 &&
              scenarios >= 1 && latent_dim >= 1,
          "all counts must be >= 1");
  require(images <= items, "images must not exceed items");
  require(days >= 1 && test_days >= 1 && test_days < days,
          "need at least one train day and one test day");
  require(impressions_per_user_day >= 1, "impressions_per_user_day must be >= 1");
  require(cold_start_fraction >= 0.0 && cold_start_fraction <= 1.0,
          "cold_start_fraction must be in [0, 1]");
  require(base_ctr > 0.0 && base_ctr < 1.0, "base_ctr must be in (0, 1)");
  require(behaviors_min <= behavior_cap, "behaviors_min must not exceed behavior_cap");
  require(noise >= 0.0, "noise must be non-negative");
}

namespace {

std::vector<float> GaussianRows(Rng& rng, size_t rows, size_t dim) {
  std::vector<float> out(rows * dim);
  for (float& v : out) v = static_cast<float>(rng.Normal());
  return out;
}

double DotRows(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

std::span<const float> Row(const std::vector<float>& m, size_t dim, uint64_t r) {
  return std::span<const float>(m).subspan(r * dim, dim);
}

// Solves mean(sigmoid(bias + z)) == target by bisection (monotone in bias).
double SolveBias(const std::vector<double>& z, double target) {
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double v : z) mean += numerics::Sigmoid(mid + v);
    mean /= static_cast<double>(z.size());
    (mean < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double TrueAffinity(const SyntheticConfig& c, const GroundTruth& t,
                    const ImageFeatureStore& images, const Sample& s) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(t.dim));
  return scale * (c.id_coef * DotRows(Row(t.user_latent, t.dim, s.user),
                                      Row(t.item_latent, t.dim, s.ad)) +
                  c.visual_coef * DotRows(Row(t.user_visual, t.dim, s.user),
                                          images.Latent(s.ad_image)));
}

Dataset Generate(const SyntheticConfig& c) {
  c.Validate();
  const size_t k = c.latent_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  const uint64_t n_cold =
      c.cold_start_fraction > 0.0
          ? std::max<uint64_t>(1, static_cast<uint64_t>(std::llround(
                                      c.cold_start_fraction * static_cast<double>(c.items))))
          : 0;

  Dataset ds;
  ds.config = c;
  DatasetMeta& meta = ds.meta;
  meta.users = c.users;
  meta.warm_items = c.items;
  meta.items = c.items + n_cold;
  meta.warm_images = c.images;
  meta.images = c.images + n_cold;
  meta.categories = c.categories;
  meta.scenarios = c.scenarios;
  meta.latent_dim = k;
  meta.days = c.days;
  meta.test_days = c.test_days;

  GroundTruth& t = ds.truth;
  t.dim = k;

  // Items, categories and image assignment.
  Rng item_rng(DeriveSeed(c.seed, "items"));
  std::vector<float> centers = GaussianRows(item_rng, c.categories, k);
  t.item_latent.resize(meta.items * k);
  t.item_category.resize(meta.items);
  t.item_image.resize(meta.items);
  for (uint64_t i = 0; i < meta.items; ++i) {
    uint64_t cat = item_rng.UniformInt(c.categories);
    t.item_category[i] = cat;
    t.item_image[i] = i < c.items ? i % c.images : c.images + (i - c.items);
    for (size_t d = 0; d < k; ++d) {
      t.item_latent[i * k + d] = static_cast<float>(
          (centers[cat * k + d] + item_rng.Normal()) / std::sqrt(2.0));
    }
  }

  // Image latents; cold images come from the same distribution.
  Rng image_rng(DeriveSeed(c.seed, "images"));
  ds.images = ImageFeatureStore(k);
  {
    std::vector<float> latent(k);
    for (uint64_t j = 0; j < meta.images; ++j) {
      for (float& v : latent) v = static_cast<float>(image_rng.Normal());
      ds.images.Append(latent);
    }
  }

  Rng user_rng(DeriveSeed(c.seed, "users"));
  t.user_latent = GaussianRows(user_rng, c.users, k);
  t.user_visual = GaussianRows(user_rng, c.users, k);

  // Behavior histories: Gumbel top-L over warm items.
  Rng behavior_rng(DeriveSeed(c.seed, "behaviors"));
  std::vector<std::vector<uint64_t>> history(c.users);
  {
    std::vector<std::pair<double, uint64_t>> keyed(c.items);
    for (uint64_t u = 0; u < c.users; ++u) {
      size_t len = c.behaviors_min +
                   behavior_rng.UniformInt(c.behavior_cap - c.behaviors_min + 1);
      len = std::min<size_t>(len, c.items);
      auto ul = Row(t.user_latent, k, u);
      auto uv = Row(t.user_visual, k, u);
      for (uint64_t i = 0; i < c.items; ++i) {
        double affinity = scale * (DotRows(ul, Row(t.item_latent, k, i)) +
                                   DotRows(uv, ds.images.Latent(t.item_image[i])));
        double g = -std::log(-std::log(std::max(behavior_rng.Uniform(), 1e-300)));
        keyed[i] = {c.behavior_sharpness * affinity + g, i};
      }
      std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(len),
                        keyed.end(), [](const auto& a, const auto& b) {
                          return a.first > b.first || (a.first == b.first && a.second < b.second);
                        });
      std::vector<uint64_t> items(len);
      for (size_t j = 0; j < len; ++j) items[j] = keyed[j].second;
      behavior_rng.Shuffle(items);  // recency order
      history[u] = FilterBehaviors<uint64_t>(items, c.max_behaviors);
    }
  }

  // Impressions.
  Rng imp_rng(DeriveSeed(c.seed, "impressions"));
  std::vector<Sample> all;
  std::vector<double> logits;
  const uint32_t first_test_day = c.days - c.test_days;
  for (uint32_t day = 0; day < c.days; ++day) {
    const bool test_day = day >= first_test_day;
    for (uint64_t u = 0; u < c.users; ++u) {
      for (size_t n = 0; n < c.impressions_per_user_day; ++n) {
        Sample s;
        s.user = u;
        s.day = day;
        s.scenario = imp_rng.UniformInt(c.scenarios);
        const bool cold = test_day && n_cold > 0 && imp_rng.Bernoulli(c.cold_start_fraction);
        s.ad = cold ? c.items + imp_rng.UniformInt(n_cold) : imp_rng.UniformInt(c.items);
        s.category = t.item_category[s.ad];
        s.ad_image = t.item_image[s.ad];
        s.behavior_items = history[u];
        s.behavior_images.reserve(history[u].size());
        for (uint64_t it : history[u]) s.behavior_images.push_back(t.item_image[it]);
        logits.push_back(TrueAffinity(c, t, ds.images, s) + c.noise * imp_rng.Normal());
        all.push_back(std::move(s));
      }
    }
  }

  t.bias = SolveBias(logits, c.base_ctr);
  Rng label_rng(DeriveSeed(c.seed, "labels"));
  for (size_t i = 0; i < all.size(); ++i) {
    all[i].label = label_rng.Bernoulli(numerics::Sigmoid(t.bias + logits[i])) ? 1 : 0;
    (all[i].day >= first_test_day ? ds.test : ds.train).push_back(std::move(all[i]));
  }
  return ds;
}

}  // namespace dicm::data
