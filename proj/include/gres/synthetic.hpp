#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gres/entities.hpp"
#include "gres/rng.hpp"

namespace gres {

struct GenConfig {
  std::uint32_t n_common_users = 300;
  std::uint32_t n_unique_users = 60;
  std::uint32_t n_items = 200;
  std::uint32_t n_categories = 40;
  std::uint32_t n_dishes = 150;
  double unique_user_proportion = 60.0 / 360.0;  // M
  double sparsity_a = 0.01;
  std::uint32_t latent_dim = 8;
  std::uint64_t rng_seed = 1;

  // generator shape knobs; fixed defaults keep configs small
  std::uint32_t vocab_size = 504;       // divisible by typical latent_dim values
  std::uint32_t doc_min = 20, doc_max = 50;
  double affinity_sharpness = 6.0;      // softmax temperature on latent affinity
  double recipe_category_boost = 3.0;   // purchase bias toward own recipe categories
};

class GenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Topic mixtures are points on the simplex; affinity is their dot product.
using Mixture = std::vector<double>;

inline Mixture point_mass(std::size_t t, std::size_t dim, double mass) {
  Mixture m(dim, (1.0 - mass) / static_cast<double>(dim));
  m[t] += mass;
  return m;
}

inline Mixture blend(const Mixture& a, const Mixture& b, double wa) {
  Mixture m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = wa * a[i] + (1.0 - wa) * b[i];
  return m;
}

inline Mixture mean_of(const std::vector<const Mixture*>& ms) {
  Mixture m(ms.front()->size(), 0.0);
  for (const Mixture* p : ms)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += (*p)[i];
  for (auto& v : m) v /= static_cast<double>(ms.size());
  return m;
}

inline double affinity(const Mixture& a, const Mixture& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Doc sample_doc(const Mixture& m, std::uint32_t vocab_per_topic, std::uint32_t lo,
                      std::uint32_t hi, Rng& rng) {
  std::size_t len = lo + rng.below(hi - lo + 1);
  Doc doc;
  doc.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    std::size_t topic = rng.weighted(m);
    std::size_t word = rng.below(vocab_per_topic);
    doc.push_back("w" + std::to_string(topic) + "_" + std::to_string(word));
  }
  return doc;
}

// without-replacement sampling proportional to exp(sharpness * affinity)
inline std::vector<std::size_t> preference_sample(const Mixture& user,
                                                  const std::vector<Mixture>& targets,
                                                  const std::vector<double>& boost,
                                                  double sharpness, std::size_t n,
                                                  Rng& rng) {
  std::vector<double> w(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    w[i] = std::exp(sharpness * affinity(user, targets[i])) * boost[i];
  std::vector<std::size_t> picked;
  n = std::min(n, targets.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = rng.weighted(w);
    picked.push_back(idx);
    w[idx] = 0.0;
  }
  return picked;
}

}  // namespace detail

inline void check_config(const GenConfig& cfg) {
  auto fail = [](const std::string& m) { throw GenError("infeasible config: " + m); };
  if (cfg.n_common_users < 1 || cfg.n_unique_users < 1 || cfg.n_items < 1 ||
      cfg.n_categories < 1 || cfg.n_dishes < 1)
    fail("all entity counts must be >= 1");
  if (cfg.latent_dim < 1) fail("latent_dim must be >= 1");
  if (!(cfg.sparsity_a > 0.0 && cfg.sparsity_a < 1.0)) fail("sparsity_a outside (0,1)");
  if (!(cfg.unique_user_proportion > 0.0 && cfg.unique_user_proportion < 1.0))
    fail("unique_user_proportion outside (0,1)");
  double total = cfg.n_common_users + cfg.n_unique_users;
  double m_actual = cfg.n_unique_users / total;
  if (std::fabs(cfg.unique_user_proportion - m_actual) > 1.0 / total + 1e-9)
    fail("unique_user_proportion " + std::to_string(cfg.unique_user_proportion) +
         " inconsistent with user counts (actual " + std::to_string(m_actual) + ")");
  if (cfg.n_items < cfg.n_categories)
    fail("fewer items than categories leaves empty categories, so no recipe can be "
         "constructed for every dish");
  if (cfg.doc_min < 1 || cfg.doc_max < cfg.doc_min) fail("bad document length range");
  if (cfg.vocab_size < cfg.latent_dim) fail("vocabulary smaller than topic count");
}

// Latent user/item mixtures drive both interaction sampling and the template
// documents, so text similarity correlates with interaction similarity and
// the graph construction has a recoverable signal.
inline Dataset generate_synthetic(const GenConfig& cfg) {
  using namespace detail;
  check_config(cfg);
  Rng rng(cfg.rng_seed);
  Dataset ds;

  std::size_t topics = cfg.latent_dim;
  std::uint32_t vocab_per_topic = cfg.vocab_size / cfg.latent_dim;

  // categories: one dominant topic each, all topics covered
  std::vector<Mixture> cat_mix;
  for (std::uint32_t c = 0; c < cfg.n_categories; ++c) {
    std::size_t topic = c < topics ? c : rng.below(topics);
    cat_mix.push_back(point_mass(topic, topics, 0.9));
  }

  // items: round-robin over a shuffled order so every category is non-empty
  std::vector<std::uint32_t> item_order(cfg.n_items);
  std::iota(item_order.begin(), item_order.end(), 0u);
  rng.shuffle(item_order);
  std::vector<std::uint32_t> item_cat(cfg.n_items);
  for (std::uint32_t k = 0; k < cfg.n_items; ++k)
    item_cat[item_order[k]] = k % cfg.n_categories;
  std::vector<std::vector<EntityId>> cat_items(cfg.n_categories);
  std::vector<Mixture> item_mix;
  for (std::uint32_t i = 0; i < cfg.n_items; ++i) {
    cat_items[item_cat[i]].push_back(item_id(i));
    Mixture noise = point_mass(rng.below(topics), topics, 0.5);
    item_mix.push_back(blend(cat_mix[item_cat[i]], noise, 0.9));
  }

  // recipes: 2-3 topically coherent categories, 1-2 items each
  std::vector<Recipe> recipes;
  std::vector<Mixture> dish_mix;
  for (std::uint32_t d = 0; d < cfg.n_dishes; ++d) {
    std::size_t n_cats = std::min<std::size_t>(2 + rng.below(2), cfg.n_categories);
    std::size_t first = rng.below(cfg.n_categories);
    std::vector<std::size_t> cats{first};
    std::vector<double> w(cfg.n_categories);
    for (std::size_t c = 0; c < cfg.n_categories; ++c)
      w[c] = std::exp(8.0 * affinity(cat_mix[first], cat_mix[c]));
    w[first] = 0.0;
    while (cats.size() < n_cats) {
      std::size_t c = rng.weighted(w);
      cats.push_back(c);
      w[c] = 0.0;
    }
    std::sort(cats.begin(), cats.end());
    Recipe r;
    r.dish = dish_id(d);
    std::vector<const Mixture*> parts;
    for (std::size_t c : cats) {
      RecipeComponent comp;
      comp.category = category_id(static_cast<std::uint32_t>(c));
      const auto& pool = cat_items[c];
      std::size_t take = std::min<std::size_t>(1 + rng.below(2), pool.size());
      std::set<std::size_t> chosen;
      while (chosen.size() < take) chosen.insert(rng.below(pool.size()));
      for (std::size_t k : chosen) comp.items.push_back(pool[k]);
      r.components.push_back(std::move(comp));
      parts.push_back(&cat_mix[c]);
    }
    recipes.push_back(std::move(r));
    dish_mix.push_back(mean_of(parts));
  }

  // users: one primary and one secondary topic
  std::uint32_t total_users = cfg.n_common_users + cfg.n_unique_users;
  std::vector<Mixture> user_mix;
  std::vector<bool> is_common(total_users);
  for (std::uint32_t u = 0; u < total_users; ++u) {
    is_common[u] = u < cfg.n_common_users;
    std::size_t t1 = rng.below(topics);
    std::size_t t2 = rng.below(topics);
    user_mix.push_back(blend(point_mass(t1, topics, 0.85), point_mass(t2, topics, 0.85), 0.75));
  }

  // documents
  for (std::uint32_t c = 0; c < cfg.n_categories; ++c)
    ds.categories.push_back({category_id(c),
                             sample_doc(cat_mix[c], vocab_per_topic, cfg.doc_min, cfg.doc_max, rng)});
  for (std::uint32_t i = 0; i < cfg.n_items; ++i)
    ds.items.push_back({item_id(i), category_id(item_cat[i]),
                        sample_doc(item_mix[i], vocab_per_topic, cfg.doc_min, cfg.doc_max, rng)});
  for (std::uint32_t d = 0; d < cfg.n_dishes; ++d)
    ds.dishes.push_back({dish_id(d),
                         sample_doc(dish_mix[d], vocab_per_topic, cfg.doc_min, cfg.doc_max, rng)});
  for (std::uint32_t u = 0; u < total_users; ++u)
    ds.users.push_back({user_id(u), is_common[u],
                        sample_doc(user_mix[u], vocab_per_topic, cfg.doc_min, cfg.doc_max, rng)});
  ds.recipes = std::move(recipes);

  // domain B: common users sell dishes they are affine to
  std::vector<std::set<std::uint32_t>> user_recipe_cats(total_users);
  std::vector<double> no_boost(cfg.n_dishes, 1.0);
  for (std::uint32_t u = 0; u < cfg.n_common_users; ++u) {
    std::size_t n_sold = 1 + std::min<std::uint32_t>(rng.poisson(1.2), 4);
    auto picked = preference_sample(user_mix[u], dish_mix, no_boost,
                                    cfg.affinity_sharpness, n_sold, rng);
    std::sort(picked.begin(), picked.end());
    for (std::size_t d : picked) {
      ds.interactions.push_back({user_id(u), dish_id(static_cast<std::uint32_t>(d)),
                                 rng.one_plus_geometric(0.5), Domain::B});
      for (const auto& comp : ds.recipes[d].components)
        user_recipe_cats[u].insert(comp.category.index);
    }
  }

  // domain A: purchases follow latent affinity; common users also lean toward
  // the categories their recipes use
  double lambda = cfg.sparsity_a * cfg.n_items;
  for (std::uint32_t u = 0; u < total_users; ++u) {
    std::size_t n_buy = std::max<std::uint32_t>(1, rng.poisson(lambda));
    std::vector<double> boost(cfg.n_items, 1.0);
    if (is_common[u])
      for (std::uint32_t i = 0; i < cfg.n_items; ++i)
        if (user_recipe_cats[u].count(item_cat[i])) boost[i] = cfg.recipe_category_boost;
    auto picked = preference_sample(user_mix[u], item_mix, boost,
                                    cfg.affinity_sharpness, n_buy, rng);
    std::sort(picked.begin(), picked.end());
    for (std::size_t i : picked)
      ds.interactions.push_back({user_id(u), item_id(static_cast<std::uint32_t>(i)),
                                 rng.one_plus_geometric(0.5), Domain::A});
  }

  return ds;
}

}  // namespace gres
