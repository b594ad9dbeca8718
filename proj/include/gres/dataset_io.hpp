#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gres/entities.hpp"

namespace gres {

// One JSONL file per entity class plus one for interactions, UTF-8.
// Field names are part of the interchange format and documented in the README.
namespace dataset_files {
inline constexpr const char* kUsers = "users.jsonl";
inline constexpr const char* kCategories = "categories.jsonl";
inline constexpr const char* kItems = "items.jsonl";
inline constexpr const char* kDishes = "dishes.jsonl";
inline constexpr const char* kRecipes = "recipes.jsonl";
inline constexpr const char* kInteractions = "interactions.jsonl";
}  // namespace dataset_files

class DatasetIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::ordered_json;

[[noreturn]] inline void io_fail(const std::string& file, std::size_t line,
                                 const std::string& what) {
  throw DatasetIoError(file + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T get_field(const json& j, const std::string& file, std::size_t line, const char* field) {
  if (!j.contains(field)) io_fail(file, line, std::string("missing field '") + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    io_fail(file, line, std::string("bad value for field '") + field + "'");
  }
}

inline json doc_to_json(const Doc& d) { return json(d); }

// Applies fn to every parsed line of a JSONL file.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw DatasetIoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      io_fail(path.filename().string(), lineno, std::string("invalid JSON: ") + e.what());
    }
    fn(j, lineno);
  }
}

}  // namespace detail

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  using detail::json;
  fs::create_directories(dir);

  auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw DatasetIoError("cannot write " + (dir / name).string());
    return os;
  };

  {
    auto os = open(dataset_files::kUsers);
    for (const auto& u : ds.users) {
      json j{{"user", u.id.index}, {"common", u.is_common}, {"doc", u.profile_doc}};
      os << j.dump() << '\n';
    }
  }
  {
    auto os = open(dataset_files::kCategories);
    for (const auto& c : ds.categories) {
      json j{{"category", c.id.index}, {"doc", c.doc}};
      os << j.dump() << '\n';
    }
  }
  {
    auto os = open(dataset_files::kItems);
    for (const auto& it : ds.items) {
      json j{{"item", it.id.index}, {"category", it.category.index}, {"doc", it.doc}};
      os << j.dump() << '\n';
    }
  }
  {
    auto os = open(dataset_files::kDishes);
    for (const auto& d : ds.dishes) {
      json j{{"dish", d.id.index}, {"doc", d.doc}};
      os << j.dump() << '\n';
    }
  }
  {
    auto os = open(dataset_files::kRecipes);
    for (const auto& r : ds.recipes) {
      json comps = json::array();
      for (const auto& c : r.components) {
        json items = json::array();
        for (EntityId it : c.items) items.push_back(it.index);
        comps.push_back(json{{"category", c.category.index}, {"items", items}});
      }
      json j{{"dish", r.dish.index}, {"components", comps}};
      os << j.dump() << '\n';
    }
  }
  {
    auto os = open(dataset_files::kInteractions);
    for (const auto& in : ds.interactions) {
      json j{{"user", in.user.index},
             {"domain", in.domain == Domain::A ? "A" : "B"},
             {"target", in.target.index},
             {"count", in.count}};
      os << j.dump() << '\n';
    }
  }
}

// Loads and validates. Malformed records fail with file, line and field;
// invariant violations fail with the validation summary.
inline Dataset load_dataset(const std::filesystem::path& dir) {
  using detail::get_field;
  Dataset ds;

  detail::for_each_line(dir / dataset_files::kUsers, [&](const detail::json& j, std::size_t ln) {
    UserRecord u;
    u.id = user_id(get_field<std::uint32_t>(j, dataset_files::kUsers, ln, "user"));
    u.is_common = get_field<bool>(j, dataset_files::kUsers, ln, "common");
    u.profile_doc = get_field<Doc>(j, dataset_files::kUsers, ln, "doc");
    ds.users.push_back(std::move(u));
  });
  detail::for_each_line(dir / dataset_files::kCategories, [&](const detail::json& j, std::size_t ln) {
    CategoryRecord c;
    c.id = category_id(get_field<std::uint32_t>(j, dataset_files::kCategories, ln, "category"));
    c.doc = get_field<Doc>(j, dataset_files::kCategories, ln, "doc");
    ds.categories.push_back(std::move(c));
  });
  detail::for_each_line(dir / dataset_files::kItems, [&](const detail::json& j, std::size_t ln) {
    ItemRecord it;
    it.id = item_id(get_field<std::uint32_t>(j, dataset_files::kItems, ln, "item"));
    it.category = category_id(get_field<std::uint32_t>(j, dataset_files::kItems, ln, "category"));
    it.doc = get_field<Doc>(j, dataset_files::kItems, ln, "doc");
    ds.items.push_back(std::move(it));
  });
  detail::for_each_line(dir / dataset_files::kDishes, [&](const detail::json& j, std::size_t ln) {
    DishRecord d;
    d.id = dish_id(get_field<std::uint32_t>(j, dataset_files::kDishes, ln, "dish"));
    d.doc = get_field<Doc>(j, dataset_files::kDishes, ln, "doc");
    ds.dishes.push_back(std::move(d));
  });
  detail::for_each_line(dir / dataset_files::kRecipes, [&](const detail::json& j, std::size_t ln) {
    Recipe r;
    r.dish = dish_id(get_field<std::uint32_t>(j, dataset_files::kRecipes, ln, "dish"));
    auto comps = get_field<detail::json>(j, dataset_files::kRecipes, ln, "components");
    for (const auto& cj : comps) {
      RecipeComponent comp;
      comp.category =
          category_id(get_field<std::uint32_t>(cj, dataset_files::kRecipes, ln, "category"));
      for (auto idx : get_field<std::vector<std::uint32_t>>(cj, dataset_files::kRecipes, ln, "items"))
        comp.items.push_back(item_id(idx));
      r.components.push_back(std::move(comp));
    }
    ds.recipes.push_back(std::move(r));
  });
  detail::for_each_line(dir / dataset_files::kInteractions, [&](const detail::json& j, std::size_t ln) {
    Interaction in;
    in.user = user_id(get_field<std::uint32_t>(j, dataset_files::kInteractions, ln, "user"));
    std::string dom = get_field<std::string>(j, dataset_files::kInteractions, ln, "domain");
    if (dom != "A" && dom != "B")
      detail::io_fail(dataset_files::kInteractions, ln, "bad value for field 'domain'");
    in.domain = dom == "A" ? Domain::A : Domain::B;
    std::uint32_t target = get_field<std::uint32_t>(j, dataset_files::kInteractions, ln, "target");
    in.target = in.domain == Domain::A ? item_id(target) : dish_id(target);
    in.count = get_field<std::uint32_t>(j, dataset_files::kInteractions, ln, "count");
    ds.interactions.push_back(in);
  });

  if (ds.interactions.empty()) throw DatasetIoError("no interactions in " + dir.string());

  ValidationReport rep = validate(ds);
  if (!rep.ok())
    throw DatasetIoError("dataset in " + dir.string() + " is invalid:\n" + rep.summary());
  return ds;
}

}  // namespace gres
