// Copyright 2026 The TCompoundE Authors.
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

#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "tce/data.h"

namespace tce {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tce_data_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void Write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
  }
};

TEST_CASE("toy dataset loads with distinct vocabulary") {
  TempDir dir;
  dir.Write("train.txt", "Canada\tConsult\tFrance\t2014-01-02\nFrance\tConsult\tCanada\t2014-01-01\n");
  dir.Write("valid.txt", "Canada\tPraise\tFrance\t2014-01-02\n");
  dir.Write("test.txt", "  France \tPraise\tJapan\t2014-01-03  \n");
  const Dataset ds = LoadDataset(dir.path, "toy");
  CHECK(ds.name == "toy");
  CHECK(ds.vocab.entities() == std::vector<std::string>{"Canada", "France", "Japan"});
  CHECK(ds.vocab.relations() == std::vector<std::string>{"Consult", "Praise"});
  CHECK(ds.vocab.timestamps() == std::vector<std::string>{"2014-01-01", "2014-01-02", "2014-01-03"});
  REQUIRE(ds.train.size() == 2);
  CHECK(ds.train[0] == Quadruple{0, 0, 1, 1});
  CHECK(ds.test[0] == Quadruple{1, 1, 2, 2});

  const Dataset again = LoadDataset(dir.path, "toy");
  CHECK(again.vocab == ds.vocab);
  CHECK(again.train == ds.train);
}

TEST_CASE("files without suffix and blank lines") {
  TempDir dir;
  dir.Write("train", "a\tr\tb\t1\n\nb\tr\ta\t2\n");
  dir.Write("valid", "a\tr\tb\t2\n");
  dir.Write("test", "a\tr\tb\t10\n");
  const Dataset ds = LoadDataset(dir.path);
  CHECK(ds.name == dir.path.filename().string());
  CHECK(ds.train.size() == 2);
  CHECK(ds.warnings.size() == 1);
  // Integer stamps sort numerically.
  CHECK(ds.vocab.timestamps() == std::vector<std::string>{"1", "2", "10"});
}

TEST_CASE("load errors name the file") {
  TempDir dir;
  dir.Write("train.txt", "a\tr\tb\t2014-01-01\n");
  dir.Write("test.txt", "a\tr\tb\t2014-01-01\n");
  try {
    LoadDataset(dir.path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("valid") != std::string::npos);
  }
  dir.Write("valid.txt", "a\tr\tb\n");
  try {
    LoadDataset(dir.path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("valid") != std::string::npos);
    CHECK(msg.find(":1") != std::string::npos);
  }
}

TEST_CASE("numeric timestamp collision") {
  CHECK_THROWS_AS(Vocabulary::Build({"a"}, {"r"}, {"1", "01"}), DataError);
}

TEST_CASE("vocabulary round trip and chronology") {
  const Dataset ds = MakeSyntheticDataset(30, 4, 40, 200, 20, 20, 3);
  const auto& v = ds.vocab;
  for (Id i = 0; i < v.num_entities(); ++i) CHECK(v.entity_id(v.entity(i)) == i);
  for (Id i = 0; i < v.num_relations(); ++i) CHECK(v.relation_id(v.relation(i)) == i);
  for (Id i = 0; i < v.num_times(); ++i) CHECK(v.timestamp_id(v.timestamp(i)) == i);
  for (Id i = 1; i < v.num_times(); ++i) CHECK(v.timestamp(i - 1) < v.timestamp(i));
  CHECK(v.relation(static_cast<Id>(v.num_relations())) == v.relation(0) + "^-1");
  CHECK_THROWS(v.entity_id("nobody"));
}

TEST_CASE("synthetic dataset") {
  const Dataset ds = MakeSyntheticDataset(20, 5, 10, 200, 0, 0, 1);
  CHECK(ds.train.size() == 200);
  CHECK(ds.vocab.num_entities() == 20);
  CHECK(ds.vocab.num_relations() == 5);
  CHECK(ds.vocab.num_times() == 10);
  CHECK(std::set<Quadruple>(ds.train.begin(), ds.train.end()).size() == 200);
  CHECK(ds.vocab.timestamp(0) == "2014-01-01");
  CHECK(ds.vocab.timestamp(9) == "2014-01-10");
  const Dataset again = MakeSyntheticDataset(20, 5, 10, 200, 0, 0, 1);
  CHECK(again.train == ds.train);
}

TEST_CASE("reciprocal augmentation") {
  CHECK(AugmentReciprocal({}, 230).empty());
  const std::vector<Quadruple> one{{0, 3, 5, 7}};
  const auto aug = AugmentReciprocal(one, 230);
  REQUIRE(aug.size() == 2);
  CHECK(aug[0] == Quadruple{0, 3, 5, 7});
  CHECK(aug[1] == Quadruple{5, 233, 0, 7});
  CHECK_THROWS(AugmentReciprocal(aug, 230));

  const Dataset ds = MakeSyntheticDataset(15, 3, 6, 80, 0, 0, 9);
  const auto all = AugmentReciprocal(ds.train, 3);
  CHECK(all.size() == 2 * ds.train.size());
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    const Quadruple& inv = all[2 * i + 1];
    // The inverse of the inverse has the original key.
    const Quadruple back{inv.tail, inv.rel - 3, inv.head, inv.time};
    CHECK(back == ds.train[i]);
  }
}

TEST_CASE("filter index") {
  SUBCASE("single fact") {
    FilterIndex f;
    f.Add({1, 2, 3, 4});
    f.Finalize();
    const auto tails = f.Tails(1, 2, 4);
    REQUIRE(tails.size() == 1);
    CHECK(tails[0] == 3);
    CHECK(f.Tails(1, 2, 5).empty());
  }
  SUBCASE("two tails, one key, duplicates idempotent") {
    FilterIndex f;
    f.Add({1, 2, 3, 4});
    f.Add({1, 2, 0, 4});
    f.Add({1, 2, 3, 4});
    f.Finalize();
    CHECK(f.num_keys() == 1);
    CHECK(f.Tails(1, 2, 4).size() == 2);
    CHECK(f.Tails(1, 2, 4)[0] == 0);
  }
  SUBCASE("conservation over splits") {
    const Dataset ds = MakeSyntheticDataset(25, 4, 8, 300, 40, 40, 5);
    const std::vector<Quadruple> splits[] = {AugmentReciprocal(ds.train, 4),
                                             AugmentReciprocal(ds.valid, 4),
                                             AugmentReciprocal(ds.test, 4)};
    const FilterIndex f = BuildFilterIndex(splits);
    CHECK(f.total_size() == 2 * (300 + 40 + 40));
    for (const auto& split : splits)
      for (const auto& q : split) CHECK(f.Contains(q));
  }
}

TEST_CASE("tsv round trip") {
  TempDir dir;
  const Dataset ds = MakeSyntheticDataset(12, 3, 5, 40, 6, 6, 2);
  WriteDatasetTsv(ds, dir.path);
  const Dataset back = LoadDataset(dir.path, ds.name);
  CHECK(back.vocab == ds.vocab);
  CHECK(back.train == ds.train);
  CHECK(back.valid == ds.valid);
  CHECK(back.test == ds.test);
}

}  // namespace
}  // namespace tce
