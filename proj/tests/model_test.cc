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

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.h"
#include "tce/model.h"

namespace tce {
namespace {

using testing::ClosedFormScore;
using testing::OracleScore;
using testing::RelErr;

Model<double> RandomModel(const std::string& variant, std::size_t dim, std::uint64_t seed,
                          Fusion fusion = Fusion::kVector,
                          ScoreKind score = ScoreKind::kSimilarity) {
  Model<double> m({dim, 6, 3, 4}, {variant, fusion, score});
  m.InitGaussian(seed, 1.0);
  return m;
}

void Set(Model<double>& m, TableId id, Id row, std::vector<double> v) {
  std::copy(v.begin(), v.end(), m.table(id).row(row).begin());
}

Quadruple RandomQuery(const Model<double>& m, std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) {
    return static_cast<Id>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  };
  return {pick(m.shape().num_entities), pick(m.shape().augmented_relations()),
          pick(m.shape().num_entities), pick(m.shape().num_times)};
}

TEST_CASE("registry") {
  const auto& reg = VariantRegistry();
  CHECK(reg.size() == 16);
  std::set<std::string> names;
  for (const auto& v : reg) names.insert(v.name);
  CHECK(names.size() == 16);
  CHECK(names.count("TCompoundE") == 1);
  for (int k = 1; k <= 15; ++k) CHECK(names.count("V" + std::to_string(k)) == 1);
  CHECK_THROWS_AS(FindVariant("V16"), std::invalid_argument);

  const auto& p = FindVariant("TCompoundE").pipeline;
  REQUIRE(p.head_atoms.size() == 2);
  CHECK(p.head_atoms[0].kind == OpKind::kTranslate);
  CHECK(p.head_atoms[1].kind == OpKind::kScale);
  CHECK(p.carrier == std::optional<std::size_t>(1));
  REQUIRE(p.time_atoms.size() == 2);
  CHECK(p.time_atoms[0].kind == OpKind::kTranslate);
  CHECK(p.time_atoms[1].kind == OpKind::kScale);
}

TEST_CASE("table widths follow the variant") {
  const Model<double> tc({8, 5, 2, 3}, {});
  CHECK(tc.TableWidth(TableId::kEntity) == 8);
  CHECK(tc.TableWidth(TableId::kRelTranslate) == 8);
  CHECK(tc.TableWidth(TableId::kRelScale) == 8);
  CHECK_FALSE(tc.UsesTable(TableId::kRelRotate));
  CHECK_FALSE(tc.UsesTable(TableId::kTimeRotate));
  CHECK(tc.table(TableId::kRelScale).rows() == 4);
  CHECK(tc.table(TableId::kTimeScale).rows() == 3);

  const Model<double> v6({8, 5, 2, 3}, {"V6", Fusion::kVector, ScoreKind::kSimilarity});
  CHECK(v6.TableWidth(TableId::kRelRotate) == 4);
  CHECK(v6.TableWidth(TableId::kTimeTranslate) == 4);
  const Model<double> v6m({8, 5, 2, 3}, {"V6", Fusion::kMatrix, ScoreKind::kSimilarity});
  CHECK(v6m.TableWidth(TableId::kTimeTranslate) == 8);

  const Model<double> v10({8, 5, 2, 3}, {"V10", Fusion::kVector, ScoreKind::kSimilarity});
  CHECK(v10.TableWidth(TableId::kTimeRotate) == 4);
  CHECK_THROWS_AS((Model<double>({7, 5, 2, 3}, {"V3", Fusion::kVector, ScoreKind::kSimilarity})),
                  GeometryError);
  CHECK_THROWS_AS((Model<double>({0, 5, 2, 3}, {})), std::invalid_argument);
}

TEST_CASE("score examples") {
  Model<double> m({2, 2, 1, 1}, {});
  m.SetIdentityOperators();
  Set(m, TableId::kEntity, 0, {1, 0});
  CHECK(m.Score({0, 0, 0, 0}) == 1.0);

  Set(m, TableId::kEntity, 0, {1, 1});
  Set(m, TableId::kEntity, 1, {1, 0});
  Set(m, TableId::kRelTranslate, 0, {1, 1});
  Set(m, TableId::kRelScale, 0, {1, 2});
  Set(m, TableId::kTimeTranslate, 0, {1, 0});
  Set(m, TableId::kTimeScale, 0, {3, 3});
  CHECK(m.Score({0, 0, 1, 0}) == 12.0);
}

TEST_CASE("TCompoundE score equals the written-out formula") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = RandomModel("TCompoundE", 8, trial);
    const Quadruple q = RandomQuery(m, rng);
    CHECK(RelErr(m.Score(q), ClosedFormScore(m, q)) < 1e-12);
  }
}

TEST_CASE("every variant, fusion and scorer matches the homogeneous-matrix oracle") {
  std::mt19937_64 rng(2);
  for (const auto& v : VariantRegistry()) {
    for (Fusion fusion : {Fusion::kVector, Fusion::kMatrix}) {
      for (ScoreKind score : {ScoreKind::kSimilarity, ScoreKind::kDistance}) {
        double worst = 0.0;
        for (int trial = 0; trial < 40; ++trial) {
          const auto m = RandomModel(v.name, 2 * (1 + trial % 4), trial, fusion, score);
          const Quadruple q = RandomQuery(m, rng);
          worst = std::max(worst, RelErr(m.Score(q), OracleScore(m, q)));
        }
        CHECK_MESSAGE(worst < 1e-10, v.name, " ", ToString(fusion), " ", ToString(score));
      }
    }
  }
}

TEST_CASE("V1 with identity time parameters is a plain translation") {
  auto m = RandomModel("V1", 4, 9);
  for (std::size_t t = 0; t < m.shape().num_times; ++t) {
    Set(m, TableId::kTimeTranslate, static_cast<Id>(t), {0, 0, 0, 0});
    Set(m, TableId::kTimeScale, static_cast<Id>(t), {1, 1, 1, 1});
  }
  typename Model<double>::Workspace ws;
  m.TransformHead(2, 1, 3, ws);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(ws.head[i] == m.table(TableId::kEntity).at(2, i) + m.table(TableId::kRelTranslate).at(1, i));
}

TEST_CASE("V6 rotates the head by the fused angle") {
  auto m = RandomModel("V6", 2, 4);
  typename Model<double>::Workspace ws;
  m.TransformHead(0, 1, 2, ws);
  const double angle = m.table(TableId::kTimeScale).at(2, 0) *
                       (m.table(TableId::kRelRotate).at(1, 0) + m.table(TableId::kTimeTranslate).at(2, 0));
  const double x = m.table(TableId::kEntity).at(0, 0), y = m.table(TableId::kEntity).at(0, 1);
  CHECK(ws.head[0] == doctest::Approx(x * std::cos(angle) - y * std::sin(angle)).epsilon(1e-12));
  CHECK(ws.head[1] == doctest::Approx(x * std::sin(angle) + y * std::cos(angle)).epsilon(1e-12));
}

TEST_CASE("score_all_tails") {
  SUBCASE("identity parameters and identity entity table") {
    Model<double> m({3, 3, 1, 1}, {});
    m.SetIdentityOperators();
    for (Id e = 0; e < 3; ++e)
      for (std::size_t k = 0; k < 3; ++k) m.table(TableId::kEntity).at(e, k) = e == k ? 1.0 : 0.0;
    CHECK(m.ScoreAllTails(0, 0, 0) == std::vector<double>{1, 0, 0});
  }
  SUBCASE("matches independent score calls") {
    for (ScoreKind kind : {ScoreKind::kSimilarity, ScoreKind::kDistance}) {
      Model<double> md({8, 50, 2, 3}, {"TCompoundE", Fusion::kVector, kind});
      md.InitGaussian(5, 1.0);
      Model<float> mf({8, 50, 2, 3}, {"TCompoundE", Fusion::kVector, kind});
      mf.InitGaussian(5, 1.0);
      const auto all_d = md.ScoreAllTails(3, 1, 2);
      const auto all_f = mf.ScoreAllTails(3, 1, 2);
      CHECK(all_d == md.ScoreAllTails(3, 1, 2));
      for (Id e = 0; e < 50; ++e) {
        CHECK(RelErr(all_d[e], md.Score({3, 1, e, 2})) < 1e-12);
        CHECK(std::abs(all_f[e] - mf.Score({3, 1, e, 2})) < 1e-6 * (1 + std::abs(all_f[e])));
      }
    }
  }
}

TEST_CASE("ids are range checked") {
  const Model<double> m({4, 5, 2, 3}, {});
  CHECK_THROWS_AS(m.Score({5, 0, 0, 0}), IdError);
  CHECK_THROWS_AS(m.Score({0, 4, 0, 0}), IdError);
  CHECK_THROWS_AS(m.Score({0, 0, 5, 0}), IdError);
  CHECK_THROWS_AS(m.Score({0, 0, 0, 3}), IdError);
  CHECK_NOTHROW(m.Score({4, 3, 4, 2}));
}

double FdPartial(Model<double> m, const Quadruple& q, TableId id, Id row, std::size_t k,
                 double h = 1e-6) {
  const double x = m.table(id).at(row, k);
  m.table(id).at(row, k) = x + h;
  const double up = m.Score(q);
  m.table(id).at(row, k) = x - h;
  const double down = m.Score(q);
  return (up - down) / (2 * h);
}

double GradError(const Model<double>& m, const Quadruple& q, const SparseGrad& g,
                 double upstream) {
  double worst = 0.0;
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    if (!m.UsesTable(id)) continue;
    for (Id row = 0; row < m.table(id).rows(); ++row) {
      const auto it = g.find({id, row});
      for (std::size_t k = 0; k < m.table(id).cols(); ++k) {
        const double analytic = it == g.end() ? 0.0 : it->second[k];
        const double numeric = upstream * FdPartial(m, q, id, row, k);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
      }
    }
  }
  return worst;
}

TEST_CASE("closed-form gradients") {
  std::mt19937_64 rng(7);
  SUBCASE("match finite differences at d = 16") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = RandomModel("TCompoundE", 16, 100 + trial);
      const Quadruple q = RandomQuery(m, rng);
      CHECK(GradError(m, q, m.ScoreGradients(q, 1.0), 1.0) < 1e-5);
    }
  }
  SUBCASE("identity parameters give d phi / d e_o = e_s") {
    auto m = RandomModel("TCompoundE", 4, 3);
    m.SetIdentityOperators();
    const Quadruple q{1, 2, 4, 0};
    const auto g = m.ScoreGradients(q, 1.0);
    for (std::size_t k = 0; k < 4; ++k)
      CHECK(g.at({TableId::kEntity, 4})[k] == m.table(TableId::kEntity).at(1, k));
  }
  SUBCASE("zero tail zeroes everything but the tail gradient") {
    auto m = RandomModel("TCompoundE", 4, 3);
    Set(m, TableId::kEntity, 4, {0, 0, 0, 0});
    const auto g = m.ScoreGradients({1, 2, 4, 0}, 2.5);
    for (const auto& [key, values] : g) {
      if (key.first == TableId::kEntity && key.second == 4) continue;
      for (double v : values) CHECK(v == 0.0);
    }
  }
  SUBCASE("generic route agrees with the closed form") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = RandomModel("TCompoundE", 6, 200 + trial);
      const Quadruple q = RandomQuery(m, rng);
      const auto a = m.ScoreGradients(q, 0.7);
      const auto b = m.ScoreGradientsGeneric(q, 0.7);
      REQUIRE(a.size() == b.size());
      for (const auto& [key, values] : a)
        for (std::size_t k = 0; k < values.size(); ++k)
          CHECK(RelErr(values[k], b.at(key)[k]) < 1e-12);
    }
  }
  SUBCASE("closed form rejects other configurations") {
    const auto v4 = RandomModel("V4", 4, 1);
    CHECK_THROWS_AS(v4.ScoreGradients({0, 0, 1, 0}, 1.0), std::invalid_argument);
    const auto dist = RandomModel("TCompoundE", 4, 1, Fusion::kVector, ScoreKind::kDistance);
    CHECK_THROWS_AS(dist.ScoreGradients({0, 0, 1, 0}, 1.0), std::invalid_argument);
  }
}

TEST_CASE("generic gradients match finite differences for every variant") {
  std::mt19937_64 rng(8);
  for (const auto& v : VariantRegistry()) {
    for (Fusion fusion : {Fusion::kVector, Fusion::kMatrix}) {
      for (ScoreKind score : {ScoreKind::kSimilarity, ScoreKind::kDistance}) {
        const auto m = RandomModel(v.name, 4, rng(), fusion, score);
        const Quadruple q = RandomQuery(m, rng);
        CHECK_MESSAGE(GradError(m, q, m.ScoreGradientsGeneric(q, 1.3), 1.3) < 1e-5, v.name, " ",
                      ToString(fusion), " ", ToString(score));
      }
    }
  }
}

TEST_CASE("pure scaling is symmetric") {
  auto m = RandomModel("TCompoundE", 8, 12);
  for (Id r = 0; r < 6; ++r) Set(m, TableId::kRelTranslate, r, std::vector<double>(8, 0.0));
  for (Id t = 0; t < 4; ++t) {
    Set(m, TableId::kTimeTranslate, t, std::vector<double>(8, 0.0));
    Set(m, TableId::kTimeScale, t, std::vector<double>(8, 1.0));
  }
  for (Id s = 0; s < 6; ++s)
    for (Id o = 0; o < 6; ++o) CHECK(RelErr(m.Score({s, 1, o, 2}), m.Score({o, 1, s, 2})) < 1e-12);
}

TEST_CASE("distance and similarity can rank differently") {
  bool found = false;
  for (std::uint64_t seed = 0; seed < 50 && !found; ++seed) {
    Model<double> sim({4, 10, 1, 1}, {"TCompoundE", Fusion::kVector, ScoreKind::kSimilarity});
    Model<double> dist({4, 10, 1, 1}, {"TCompoundE", Fusion::kVector, ScoreKind::kDistance});
    sim.InitGaussian(seed, 1.0);
    dist.InitGaussian(seed, 1.0);
    const auto a = sim.ScoreAllTails(0, 0, 0), b = dist.ScoreAllTails(0, 0, 0);
    const auto best_a = std::max_element(a.begin(), a.end()) - a.begin();
    const auto best_b = std::max_element(b.begin(), b.end()) - b.begin();
    found = best_a != best_b;
  }
  CHECK(found);
}

TEST_CASE("stages") {
  const auto m = RandomModel("TCompoundE", 6, 14);
  const auto stages = m.Stages(1, 2, 3);
  REQUIRE(stages.size() == 3);
  typename Model<double>::Workspace ws;
  m.TransformHead(1, 2, 3, ws);
  CHECK(stages[2] == ws.head);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(stages[0][k] == m.table(TableId::kEntity).at(1, k));
    CHECK(stages[1][k] == stages[0][k] + m.table(TableId::kRelTranslate).at(2, k));
  }
  const auto mm = RandomModel("TCompoundE", 6, 14, Fusion::kMatrix);
  CHECK(mm.Stages(1, 2, 3).size() == 5);
}

TEST_CASE("initialization is seeded") {
  Model<double> a({4, 5, 2, 3}, {}), b({4, 5, 2, 3}, {}), c({4, 5, 2, 3}, {});
  a.InitGaussian(1, 0.01);
  b.InitGaussian(1, 0.01);
  c.InitGaussian(2, 0.01);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  Model<double> id({4, 5, 2, 3}, {});
  id.InitGaussian(1, 0.01, true);
  double mean = 0.0;
  for (double v : id.table(TableId::kRelScale).data()) mean += v;
  mean /= static_cast<double>(id.table(TableId::kRelScale).data().size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

}  // namespace
}  // namespace tce
