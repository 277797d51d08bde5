#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "modx/synthetic.hpp"
#include "modx/tpl_db.hpp"
#include "temp_dir.hpp"

using namespace modx;

namespace {

LibrarySignature sized_library(const std::string& name, std::uint64_t nu, std::vector<std::size_t> sizes) {
  LibrarySignature lib;
  lib.library_name = name;
  lib.version = "1.0";
  lib.ref_frequency = nu;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    ModuleSignature m;
    m.module_id = static_cast<std::uint32_t>(k);
    m.function_count = sizes[k];
    for (std::size_t f = 0; f < sizes[k]; ++f) m.functions.push_back({"f" + std::to_string(f), 1, {}});
    lib.modules.push_back(std::move(m));
  }
  return lib;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LibrarySignature synthetic_signature(const std::string& name, std::uint64_t seed) {
  synthetic::LibraryParams params;
  params.name = name;
  params.modules = 5;
  params.min_module_size = 4;
  params.max_module_size = 8;
  params.seed = seed;
  PipelineConfig cfg;
  cfg.modularizer.ds_limit_divisor = 1;
  return build_library_signature(synthetic::library(params).graph, {name, "2.1", 3}, cfg);
}

}  // namespace

TEST(TplDb, LibraryImportance) {
  EXPECT_NEAR(library_importance(1, 5), std::log(2.0) / 5.0, 1e-12);
  EXPECT_NEAR(library_importance(1, 186), std::log(2.0) / 186.0, 1e-12);
  EXPECT_LT(library_importance(1, 186), library_importance(1, 5));
  EXPECT_EQ(library_importance(0, 5), 0.0);
  EXPECT_EQ(library_importance(3, 0), 0.0);
}

TEST(TplDb, ModuleImportance) {
  SignatureDatabase db;
  db.add_library(sized_library("bz", 1, {20, 10, 10, 5, 5}));
  EXPECT_DOUBLE_EQ(db.module_importance(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(db.module_importance(0, 1), 1.0);
  EXPECT_NEAR(db.matching_confidence(0, 0), 2.0 * std::log(2.0) / 5.0, 1e-12);
  EXPECT_NEAR(db.matching_confidence(0, 0), 0.2772, 1e-4);
}

TEST(TplDb, EqualSizesGiveUnitImportance) {
  SignatureDatabase db;
  db.add_library(sized_library("eq", 1, {7, 7, 7}));
  for (std::size_t m = 0; m < 3; ++m) EXPECT_DOUBLE_EQ(db.module_importance(0, m), 1.0);
}

TEST(TplDb, ImportanceSumsToModuleCount) {
  SignatureDatabase db;
  db.add_library(sized_library("a", 1, {3, 9, 27, 1}));
  db.add_library(sized_library("b", 4, {12, 5}));
  db.add_library(sized_library("c", 2, {8, 8, 8, 2, 1, 100}));
  double sum = 0.0;
  for (std::size_t l = 0; l < db.libraries().size(); ++l) {
    for (std::size_t m = 0; m < db.libraries()[l].modules.size(); ++m) sum += db.module_importance(l, m);
  }
  EXPECT_NEAR(sum, static_cast<double>(db.total_modules()), 1e-12);
  EXPECT_EQ(db.total_modules(), 12u);
}

TEST(TplDb, SmallLibraryOutranksLargeOne) {
  SignatureDatabase db;
  db.add_library(sized_library("libsmall", 1, std::vector<std::size_t>(5, 16)));
  db.add_library(sized_library("liblarge", 1, std::vector<std::size_t>(186, 16)));
  EXPECT_DOUBLE_EQ(db.module_importance(0, 0), db.module_importance(1, 0));
  EXPECT_GT(db.matching_confidence(0, 0), db.matching_confidence(1, 0));
}

TEST(TplDb, AddLibraryReplacesByName) {
  SignatureDatabase db;
  db.add_library(sized_library("a", 1, {3, 3}));
  db.add_library(sized_library("a", 1, {3}));
  EXPECT_EQ(db.libraries().size(), 1u);
  EXPECT_EQ(db.total_modules(), 1u);
}

TEST(TplDb, SignatureDocumentRoundTrip) {
  const auto lib = synthetic_signature("libround", 5);
  const std::string text = serialize_library_signature(lib);
  EXPECT_NE(text.find("msig-1"), std::string::npos);
  const auto back = parse_library_signature(text);
  EXPECT_EQ(back, lib);
  EXPECT_EQ(serialize_library_signature(back), text);
}

TEST(TplDb, WrongVersionRejected) {
  auto text = serialize_library_signature(sized_library("a", 1, {1}));
  text.replace(text.find("msig-1"), 6, "msig-9");
  try {
    parse_library_signature(text);
    FAIL() << "expected DatabaseError";
  } catch (const DatabaseError& e) {
    EXPECT_NE(std::string(e.what()).find("msig-9"), std::string::npos);
  }
  EXPECT_THROW(parse_library_signature("{"), DatabaseError);
}

TEST(TplDb, SaveLoadRoundTrip) {
  TempDir dir("db-roundtrip");
  SignatureDatabase db;
  db.add_library(synthetic_signature("liba", 1));
  db.add_library(synthetic_signature("libb", 2));
  save_db(db, dir.path() / "db");
  const auto back = load_db(dir.path() / "db");
  EXPECT_EQ(back, db);
  EXPECT_DOUBLE_EQ(back.matching_confidence(1, 0), db.matching_confidence(1, 0));

  save_db(back, dir.path() / "again");
  EXPECT_EQ(slurp(dir.path() / "db" / "corpus.json"), slurp(dir.path() / "again" / "corpus.json"));
  EXPECT_EQ(slurp(dir.path() / "db" / "liba" / "signature.json"),
            slurp(dir.path() / "again" / "liba" / "signature.json"));
}

TEST(TplDb, EmptyDatabaseRoundTrip) {
  TempDir dir("db-empty");
  save_db(SignatureDatabase{}, dir.path());
  const auto back = load_db(dir.path());
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back, SignatureDatabase{});
}

TEST(TplDb, CorruptDatabaseRejected) {
  TempDir dir("db-corrupt");
  EXPECT_THROW(load_db(dir.path()), DatabaseError);
  std::ofstream(dir.path() / "corpus.json") << R"({"version":"mdb-7"})";
  EXPECT_THROW(load_db(dir.path()), DatabaseError);
}

TEST(TplDb, SignProgramCoversEveryFunction) {
  const auto g = synthetic::library({.name = "cover", .modules = 4, .min_module_size = 3, .max_module_size = 6}).graph;
  Partition p;
  const auto sigs = sign_program(g, {}, &p);
  ASSERT_EQ(sigs.size(), p.module_count());
  std::size_t total = 0;
  for (const auto& s : sigs) total += s.function_count;
  EXPECT_EQ(total, g.size());
}
