#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gres/dataset_io.hpp"
#include "gres/entities.hpp"
#include "gres/synthetic.hpp"

using namespace gres;
namespace fs = std::filesystem;

namespace {

GenConfig small_config(std::uint64_t seed = 7) {
  GenConfig cfg;
  cfg.n_common_users = 25;
  cfg.n_unique_users = 5;
  cfg.n_items = 30;
  cfg.n_categories = 8;
  cfg.n_dishes = 12;
  cfg.unique_user_proportion = 5.0 / 30.0;
  cfg.sparsity_a = 0.05;
  cfg.rng_seed = seed;
  return cfg;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string dir_bytes(const fs::path& dir) {
  std::string all;
  for (const char* f : {dataset_files::kUsers, dataset_files::kCategories,
                        dataset_files::kItems, dataset_files::kDishes,
                        dataset_files::kRecipes, dataset_files::kInteractions})
    all += file_bytes(dir / f);
  return all;
}

}  // namespace

TEST(Synthetic, SameSeedGivesByteIdenticalDatasets) {
  Dataset a = generate_synthetic(small_config());
  Dataset b = generate_synthetic(small_config());
  EXPECT_EQ(a, b);
  fs::path da = fs::path(testing::TempDir()) / "ds_a";
  fs::path db = fs::path(testing::TempDir()) / "ds_b";
  save_dataset(a, da);
  save_dataset(b, db);
  EXPECT_EQ(dir_bytes(da), dir_bytes(db));
}

TEST(Synthetic, DifferentSeedsGiveDifferentInteractions) {
  Dataset a = generate_synthetic(small_config(1));
  Dataset b = generate_synthetic(small_config(2));
  EXPECT_NE(a.interactions, b.interactions);
}

TEST(Synthetic, PaperScaleUserCounts) {
  GenConfig cfg;
  cfg.n_common_users = 3000;
  cfg.n_unique_users = 600;
  cfg.unique_user_proportion = 600.0 / 3600.0;
  cfg.n_items = 100;
  cfg.n_categories = 10;
  cfg.n_dishes = 40;
  cfg.sparsity_a = 0.01;
  cfg.rng_seed = 3;
  Dataset ds = generate_synthetic(cfg);
  std::size_t common = 0, unique = 0;
  for (const auto& u : ds.users) (u.is_common ? common : unique)++;
  EXPECT_EQ(common, 3000u);
  EXPECT_EQ(unique, 600u);
  EXPECT_NEAR(static_cast<double>(unique) / ds.users.size(), cfg.unique_user_proportion,
              1.0 / ds.users.size());
}

TEST(Synthetic, SparsityControlsInteractionVolume) {
  GenConfig cfg;
  cfg.n_common_users = 250;
  cfg.n_unique_users = 50;
  cfg.unique_user_proportion = 50.0 / 300.0;
  cfg.n_items = 200;
  cfg.n_categories = 20;
  cfg.n_dishes = 60;
  cfg.sparsity_a = 0.01;
  cfg.rng_seed = 11;
  Dataset ds = generate_synthetic(cfg);
  std::size_t a_count = 0;
  for (const auto& in : ds.interactions)
    if (in.domain == Domain::A) ++a_count;
  // 300 users * 0.01 * 200 items = 600 expected
  EXPECT_GT(a_count, 480u);
  EXPECT_LT(a_count, 720u);
}

TEST(Synthetic, GeneratedDatasetValidates) {
  Dataset ds = generate_synthetic(small_config());
  ValidationReport rep = validate(ds);
  EXPECT_TRUE(rep.ok()) << rep.summary();
}

TEST(Synthetic, EveryCommonUserHasRecipeBackedDishAndPurchase) {
  Dataset ds = generate_synthetic(small_config());
  for (const auto& u : ds.users) {
    bool has_a = false;
    for (const auto& in : ds.interactions)
      if (in.user == u.id && in.domain == Domain::A) has_a = true;
    EXPECT_TRUE(has_a) << u.id.str();
    if (!u.is_common) continue;
    auto sales = ds.sales_of(u.id);
    ASSERT_FALSE(sales.empty()) << u.id.str();
    for (const auto& [dish, count] : sales) EXPECT_NE(ds.recipe_for(dish), nullptr);
  }
}

TEST(Synthetic, InfeasibleConfigRejected) {
  GenConfig cfg = small_config();
  cfg.n_items = 4;  // fewer items than categories
  EXPECT_THROW(generate_synthetic(cfg), GenError);

  cfg = small_config();
  cfg.unique_user_proportion = 0.9;  // inconsistent with counts
  EXPECT_THROW(generate_synthetic(cfg), GenError);

  cfg = small_config();
  cfg.sparsity_a = 0.0;
  EXPECT_THROW(generate_synthetic(cfg), GenError);
}

TEST(DatasetIo, SaveLoadRoundTrip) {
  Dataset ds = generate_synthetic(small_config());
  fs::path dir = fs::path(testing::TempDir()) / "ds_roundtrip";
  save_dataset(ds, dir);
  Dataset loaded = load_dataset(dir);
  EXPECT_EQ(ds, loaded);
}

TEST(DatasetIo, DomainBRecordForUniqueUserRejected) {
  Dataset ds = generate_synthetic(small_config());
  // find a unique user and give them a domain B record
  for (const auto& u : ds.users)
    if (!u.is_common) {
      ds.interactions.push_back({u.id, ds.dishes[0].id, 1, Domain::B});
      break;
    }
  fs::path dir = fs::path(testing::TempDir()) / "ds_bad_b";
  save_dataset(ds, dir);
  try {
    load_dataset(dir);
    FAIL() << "expected validation failure";
  } catch (const DatasetIoError& e) {
    EXPECT_NE(std::string(e.what()).find("domain-b-unique-user"), std::string::npos);
  }
}

TEST(DatasetIo, EmptyInteractionFileRejected) {
  Dataset ds = generate_synthetic(small_config());
  fs::path dir = fs::path(testing::TempDir()) / "ds_empty_inter";
  save_dataset(ds, dir);
  std::ofstream(dir / dataset_files::kInteractions, std::ios::trunc);
  try {
    load_dataset(dir);
    FAIL() << "expected error";
  } catch (const DatasetIoError& e) {
    EXPECT_NE(std::string(e.what()).find("no interactions"), std::string::npos);
  }
}

TEST(DatasetIo, MalformedRecordNamesFileLineAndField) {
  Dataset ds = generate_synthetic(small_config());
  fs::path dir = fs::path(testing::TempDir()) / "ds_malformed";
  save_dataset(ds, dir);
  {
    std::ofstream os(dir / dataset_files::kUsers, std::ios::app);
    os << R"({"user": 99, "doc": ["x"]})" << "\n";  // missing "common"
  }
  try {
    load_dataset(dir);
    FAIL() << "expected error";
  } catch (const DatasetIoError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("users.jsonl"), std::string::npos);
    EXPECT_NE(msg.find("common"), std::string::npos);
    EXPECT_NE(msg.find(":31"), std::string::npos);  // 30 users + 1
  }
}

TEST(Validate, CommonUserWithoutDishesReported) {
  Dataset ds = generate_synthetic(small_config());
  EntityId victim;
  for (const auto& u : ds.users)
    if (u.is_common) {
      victim = u.id;
      break;
    }
  std::erase_if(ds.interactions, [&](const Interaction& in) {
    return in.domain == Domain::B && in.user == victim;
  });
  ValidationReport rep = validate(ds);
  ASSERT_FALSE(rep.ok());
  bool found = false;
  for (const auto& i : rep.issues)
    if (i.code == "common-user-without-tms" &&
        i.message.find(victim.str()) != std::string::npos)
      found = true;
  EXPECT_TRUE(found) << rep.summary();
}

TEST(Validate, RecipeItemOutsideCategoryReported) {
  Dataset ds = generate_synthetic(small_config());
  // move the first recipe item into a different catalog category
  ASSERT_FALSE(ds.recipes.empty());
  EntityId moved = ds.recipes[0].components[0].items[0];
  EntityId old_cat = ds.items[moved.index].category;
  ds.items[moved.index].category =
      category_id((old_cat.index + 1) % static_cast<std::uint32_t>(ds.categories.size()));
  ValidationReport rep = validate(ds);
  bool found = false;
  for (const auto& i : rep.issues)
    if (i.code == "item-outside-category" && i.message.find(moved.str()) != std::string::npos)
      found = true;
  EXPECT_TRUE(found) << rep.summary();
}

TEST(Validate, UniqueUserFractionMatchesProportion) {
  for (std::uint64_t seed : {1ull, 5ull, 9ull}) {
    Dataset ds = generate_synthetic(small_config(seed));
    std::size_t unique = 0;
    for (const auto& u : ds.users)
      if (!u.is_common) ++unique;
    double frac = static_cast<double>(unique) / ds.users.size();
    EXPECT_NEAR(frac, small_config().unique_user_proportion, 1.0 / ds.users.size());
  }
}
