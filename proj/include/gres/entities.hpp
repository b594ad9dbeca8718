#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gres {

enum class EntityKind : std::uint8_t { User = 0, Item = 1, Category = 2, Dish = 3 };

inline const char* kind_name(EntityKind k) {
  switch (k) {
    case EntityKind::User: return "user";
    case EntityKind::Item: return "item";
    case EntityKind::Category: return "category";
    case EntityKind::Dish: return "dish";
  }
  return "?";
}

// (kind, index) with indices dense per kind.
struct EntityId {
  EntityKind kind{};
  std::uint32_t index{};

  auto operator<=>(const EntityId&) const = default;

  std::string str() const { return std::string(kind_name(kind)) + ":" + std::to_string(index); }
};

inline EntityId user_id(std::uint32_t i) { return {EntityKind::User, i}; }
inline EntityId item_id(std::uint32_t i) { return {EntityKind::Item, i}; }
inline EntityId category_id(std::uint32_t i) { return {EntityKind::Category, i}; }
inline EntityId dish_id(std::uint32_t i) { return {EntityKind::Dish, i}; }

using Doc = std::vector<std::string>;

struct UserRecord {
  EntityId id;
  bool is_common = false;
  Doc profile_doc;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct CategoryRecord {
  EntityId id;
  Doc doc;

  friend bool operator==(const CategoryRecord&, const CategoryRecord&) = default;
};

struct ItemRecord {
  EntityId id;
  EntityId category;
  Doc doc;

  friend bool operator==(const ItemRecord&, const ItemRecord&) = default;
};

struct DishRecord {
  EntityId id;
  Doc doc;

  friend bool operator==(const DishRecord&, const DishRecord&) = default;
};

struct RecipeComponent {
  EntityId category;
  std::vector<EntityId> items;  // non-empty, all belonging to `category`

  friend bool operator==(const RecipeComponent&, const RecipeComponent&) = default;
};

struct Recipe {
  EntityId dish;
  std::vector<RecipeComponent> components;  // >= 1

  friend bool operator==(const Recipe&, const Recipe&) = default;
};

enum class Domain : std::uint8_t { A = 0, B = 1 };

// Domain A: user purchases an item. Domain B: common user sells a dish.
struct Interaction {
  EntityId user;
  EntityId target;
  std::uint32_t count = 1;
  Domain domain = Domain::A;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct Dataset {
  std::vector<UserRecord> users;
  std::vector<CategoryRecord> categories;
  std::vector<ItemRecord> items;
  std::vector<DishRecord> dishes;
  std::vector<Recipe> recipes;
  std::vector<Interaction> interactions;

  friend bool operator==(const Dataset&, const Dataset&) = default;

  const Recipe* recipe_for(EntityId dish) const {
    for (const auto& r : recipes)
      if (r.dish == dish) return &r;
    return nullptr;
  }

  // (dish, count) sales of one user, in dish-id order
  std::vector<std::pair<EntityId, std::uint32_t>> sales_of(EntityId user) const {
    std::map<EntityId, std::uint32_t> acc;
    for (const auto& in : interactions)
      if (in.domain == Domain::B && in.user == user) acc[in.target] += in.count;
    return {acc.begin(), acc.end()};
  }

  std::vector<const Interaction*> domain_a() const {
    std::vector<const Interaction*> v;
    for (const auto& in : interactions)
      if (in.domain == Domain::A) v.push_back(&in);
    return v;
  }
};

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }

  std::string summary() const {
    std::string s;
    for (const auto& i : issues) s += i.code + ": " + i.message + "\n";
    return s;
  }
};

// Reports every invariant violation with the offending entity ids. Does not
// throw; an empty report means the dataset is valid.
inline ValidationReport validate(const Dataset& ds) {
  ValidationReport rep;
  auto issue = [&](const std::string& code, const std::string& msg) {
    rep.issues.push_back({code, msg});
  };

  auto check_dense = [&](EntityKind kind, std::size_t n, auto&& id_of) {
    for (std::size_t i = 0; i < n; ++i) {
      EntityId id = id_of(i);
      if (id.kind != kind || id.index != i)
        issue("id-not-dense", std::string(kind_name(kind)) + " record " +
                                  std::to_string(i) + " has id " + id.str());
    }
  };
  check_dense(EntityKind::User, ds.users.size(), [&](std::size_t i) { return ds.users[i].id; });
  check_dense(EntityKind::Category, ds.categories.size(),
              [&](std::size_t i) { return ds.categories[i].id; });
  check_dense(EntityKind::Item, ds.items.size(), [&](std::size_t i) { return ds.items[i].id; });
  check_dense(EntityKind::Dish, ds.dishes.size(), [&](std::size_t i) { return ds.dishes[i].id; });

  auto user_ok = [&](EntityId id) { return id.kind == EntityKind::User && id.index < ds.users.size(); };
  auto item_ok = [&](EntityId id) { return id.kind == EntityKind::Item && id.index < ds.items.size(); };
  auto cat_ok = [&](EntityId id) {
    return id.kind == EntityKind::Category && id.index < ds.categories.size();
  };
  auto dish_ok = [&](EntityId id) { return id.kind == EntityKind::Dish && id.index < ds.dishes.size(); };

  for (const auto& it : ds.items)
    if (!cat_ok(it.category))
      issue("bad-item-category", it.id.str() + " references " + it.category.str());

  // recipes: one per dish at most, structure and catalog consistency
  std::set<EntityId> recipe_dishes;
  for (const auto& r : ds.recipes) {
    if (!dish_ok(r.dish)) {
      issue("bad-recipe-dish", "recipe references " + r.dish.str());
      continue;
    }
    if (!recipe_dishes.insert(r.dish).second)
      issue("duplicate-recipe", "dish " + r.dish.str() + " has multiple recipes");
    if (r.components.empty())
      issue("empty-recipe", "recipe of " + r.dish.str() + " has no categories");
    std::set<EntityId> seen_cats;
    for (const auto& comp : r.components) {
      if (!cat_ok(comp.category)) {
        issue("bad-recipe-category", r.dish.str() + " references " + comp.category.str());
        continue;
      }
      if (!seen_cats.insert(comp.category).second)
        issue("duplicate-recipe-category",
              r.dish.str() + " repeats " + comp.category.str());
      if (comp.items.empty())
        issue("empty-recipe-category",
              r.dish.str() + " has no items under " + comp.category.str());
      for (EntityId it : comp.items) {
        if (!item_ok(it)) {
          issue("bad-recipe-item", r.dish.str() + " references " + it.str());
          continue;
        }
        if (ds.items[it.index].category != comp.category)
          issue("item-outside-category",
                it.str() + " listed under " + comp.category.str() + " in recipe of " +
                    r.dish.str() + " but belongs to " +
                    ds.items[it.index].category.str());
      }
    }
  }

  std::set<std::tuple<EntityId, EntityId, Domain>> seen_pairs;
  std::set<EntityId> sellers;
  for (const auto& in : ds.interactions) {
    if (!user_ok(in.user)) {
      issue("bad-interaction-user", "interaction references " + in.user.str());
      continue;
    }
    if (in.count < 1)
      issue("zero-count", "interaction " + in.user.str() + " -> " + in.target.str());
    if (in.domain == Domain::A) {
      if (!item_ok(in.target))
        issue("bad-domain-a-target", in.user.str() + " -> " + in.target.str());
    } else {
      if (!dish_ok(in.target))
        issue("bad-domain-b-target", in.user.str() + " -> " + in.target.str());
      if (!ds.users[in.user.index].is_common)
        issue("domain-b-unique-user",
              "unique user " + in.user.str() + " has a domain B record");
      sellers.insert(in.user);
    }
    if (!seen_pairs.insert({in.user, in.target, in.domain}).second)
      issue("duplicate-interaction",
            in.user.str() + " -> " + in.target.str() + " appears twice");
  }

  for (const auto& u : ds.users) {
    if (!u.is_common) continue;
    if (!sellers.count(u.id)) {
      issue("common-user-without-tms", "common user " + u.id.str() + " sells no dish");
      continue;
    }
    for (const auto& [dish, count] : ds.sales_of(u.id))
      if (dish_ok(dish) && !ds.recipe_for(dish))
        issue("sold-dish-without-recipe",
              u.id.str() + " sells " + dish.str() + " which has no recipe");
  }

  for (const auto& u : ds.users)
    if (u.profile_doc.empty()) issue("empty-doc", u.id.str() + " has an empty document");
  for (const auto& c : ds.categories)
    if (c.doc.empty()) issue("empty-doc", c.id.str() + " has an empty document");
  for (const auto& it : ds.items)
    if (it.doc.empty()) issue("empty-doc", it.id.str() + " has an empty document");
  for (const auto& d : ds.dishes)
    if (d.doc.empty()) issue("empty-doc", d.id.str() + " has an empty document");

  return rep;
}

}  // namespace gres
