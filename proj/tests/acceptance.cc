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

// Acceptance checks. Each criterion prints one line:
//   criterion <n> PASS|FAIL|BLOCKED <key=value ...> seconds=<t>
// Exit status: 0 pass, 1 fail, 77 blocked (missing dataset).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "fd_check.h"
#include "oracles.h"
#include "tce/eval.h"
#include "tce/geometry.h"
#include "tce/io.h"
#include "tce/patterns.h"
#include "tce/train.h"

namespace tce::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

enum class Status { kPass, kFail, kBlocked };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

constexpr int kExitBlocked = 77;

struct Context {
  fs::path artifacts;
  std::size_t threads = 0;
};

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Outcome Blocked(const std::string& why) { return {Status::kBlocked, "reason=" + why}; }

// $TCE_DATA_DIR/ICEWS14, or the reason it is unusable.
std::optional<fs::path> Icews14(std::string* why) {
  const char* root = std::getenv("TCE_DATA_DIR");
  if (root == nullptr || *root == '\0') {
    *why = "TCE_DATA_DIR_unset";
    return std::nullopt;
  }
  const fs::path dir = fs::path(root) / "ICEWS14";
  if (!fs::is_directory(dir)) {
    *why = "missing_" + dir.string();
    return std::nullopt;
  }
  return dir;
}

// ---- 1: dataset fidelity ----

Outcome DatasetFidelity(const Context& ctx) {
  std::string why;
  const auto dir = Icews14(&why);
  if (!dir) return Blocked(why);
  std::ostringstream out, err;
  fs::create_directories(ctx.artifacts);
  const int code = cli::RunCli(
      {"preprocess", dir->string(), "--out", (ctx.artifacts / "ICEWS14.tcd").string()}, out, err);
  if (code != 0) return {Status::kFail, "preprocess_exit=" + std::to_string(code)};
  const std::map<std::string, std::string> expected{
      {"entities", "7128"}, {"relations", "230"}, {"timestamps", "365"},
      {"train", "72826"},   {"valid", "8963"},    {"test", "8941"}};
  std::map<std::string, std::string> got;
  std::istringstream lines(out.str());
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) got[line.substr(0, eq)] = line.substr(eq + 1);
  }
  std::string detail;
  bool ok = true;
  for (const auto& [k, v] : expected) {
    detail += k + "=" + got[k] + " ";
    ok = ok && got[k] == v;
  }
  detail.pop_back();
  return {ok ? Status::kPass : Status::kFail, detail};
}

// ---- 2: oracle equivalence ----

// Score through the library's affine-map oracle.
double LibraryOracleScore(const Model<double>& m, const Quadruple& q) {
  const auto& p = m.variant().pipeline;
  ParamRows rel, time;
  for (const auto& a : p.head_atoms)
    rel.push_back(testing::Row(m, TableFor(a.kind, ParamSource::kRelation), q.rel));
  for (const auto& a : p.time_atoms)
    time.push_back(testing::Row(m, TableFor(a.kind, ParamSource::kTime), q.time));
  const std::size_t d = m.shape().dim;
  const AffineMap map = m.options().fusion == Fusion::kMatrix
                            ? AffineOracleMatrixFusion(p, rel, time, d)
                            : AffineOracle(p, OracleFuse(p, rel, time), d);
  const auto es = testing::Row(m, TableId::kEntity, q.head);
  const auto eo = testing::Row(m, TableId::kEntity, q.tail);
  const Eigen::VectorXd h = map.Apply(Eigen::Map<const Eigen::VectorXd>(es.data(), es.size()));
  const Eigen::VectorXd o = Eigen::Map<const Eigen::VectorXd>(eo.data(), eo.size());
  return m.options().score == ScoreKind::kSimilarity ? h.dot(o) : -(h - o).norm();
}

Outcome OracleEquivalence(const Context&) {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  std::size_t min_cases = SIZE_MAX;
  for (const auto& v : VariantRegistry()) {
    std::size_t cases = 0;
    for (std::size_t d : {2, 4, 8}) {
      for (Fusion fusion : {Fusion::kVector, Fusion::kMatrix}) {
        for (ScoreKind score : {ScoreKind::kSimilarity, ScoreKind::kDistance}) {
          Model<double> m({d, 12, 4, 5}, {v.name, fusion, score});
          m.InitGaussian(rng(), 0.8);
          for (int i = 0; i < 84; ++i) {
            const Quadruple q{static_cast<Id>(rng() % 12), static_cast<Id>(rng() % 8),
                              static_cast<Id>(rng() % 12), static_cast<Id>(rng() % 5)};
            const double fast = m.Score(q);
            worst = std::max({worst, testing::RelErr(fast, LibraryOracleScore(m, q)),
                              testing::RelErr(fast, testing::OracleScore(m, q))});
            ++cases;
          }
        }
      }
    }
    min_cases = std::min(min_cases, cases);
  }
  const bool ok = worst < 1e-10 && min_cases >= 1000;
  return {ok ? Status::kPass : Status::kFail,
          "variants=" + std::to_string(VariantRegistry().size()) +
              " cases_per_variant=" + std::to_string(min_cases) +
              " max_rel_error=" + Fmt("%.3e", worst)};
}

// ---- 3: gradient correctness ----

Outcome GradientCorrectness(const Context&) {
  std::mt19937_64 rng(3);
  const auto& variants = VariantRegistry();
  constexpr std::size_t kConfigs = 128;
  double worst = 0.0;
  std::size_t entries = 0;
  for (std::size_t i = 0; i < kConfigs; ++i) {
    const std::size_t d = 2 * (1 + rng() % 3);
    const ModelShape shape{d, 3 + rng() % 6, 1 + rng() % 3, 2 + rng() % 3};
    const ModelOptions opts{variants[i % variants.size()].name,
                            (i / 16) % 2 ? Fusion::kMatrix : Fusion::kVector,
                            (i / 32) % 2 ? ScoreKind::kDistance : ScoreKind::kSimilarity};
    Model<double> m(shape, opts);
    m.InitGaussian(rng(), 0.6);
    std::vector<Quadruple> batch(1 + rng() % 5);
    for (auto& q : batch)
      q = {static_cast<Id>(rng() % shape.num_entities),
           static_cast<Id>(rng() % shape.augmented_relations()),
           static_cast<Id>(rng() % shape.num_entities), static_cast<Id>(rng() % shape.num_times)};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    testing::Objective obj;
    obj.lambda_u = 0.1 * unit(rng);
    obj.lambda_tau = 0.5 * unit(rng);
    obj.mask = {rng() % 4 != 0, rng() % 4 != 0, rng() % 4 != 0};
    const auto rep = testing::CheckObjectiveGradient(m, batch, obj);
    worst = std::max(worst, rep.max_rel_error);
    entries += rep.entries;
  }
  return {worst < 1e-4 ? Status::kPass : Status::kFail,
          "configs=" + std::to_string(kConfigs) + " entries=" + std::to_string(entries) +
              " max_rel_error=" + Fmt("%.3e", worst)};
}

// ---- 4 and 10: memorization ----

struct MemorizationRun {
  std::vector<double> losses;
  std::optional<std::size_t> first_perfect_epoch;
  double final_mrr = 0.0;
};

MemorizationRun Memorize() {
  const Dataset ds = MakeSyntheticDataset(20, 5, 10, 200, 0, 0, 4);
  TrainConfig c;
  c.dim = 32;
  c.max_epochs = 200;
  c.batch_size = 50;
  c.learning_rate = 0.1;
  c.init_scale = 0.1;
  c.eval_every = 0;
  c.seed = 4;
  c.precision = Precision::kDouble;
  c.threads = 1;
  Model<double> model = MakeModel<double>(c, ds);
  AdagradState<double> state(model);
  const FilterIndex filter = BuildDatasetFilter(ds);
  MemorizationRun run;
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    run.losses.push_back(r.loss);
    run.final_mrr = Evaluate(model, ds.train, filter).both.mrr;
    if (run.final_mrr == 1.0 && !run.first_perfect_epoch) run.first_perfect_epoch = r.epoch;
  };
  TrainLoop(c, ds, model, state, hooks);
  return run;
}

Outcome Memorization(const Context&) {
  const MemorizationRun run = Memorize();
  const bool ok = run.first_perfect_epoch.has_value();
  return {ok ? Status::kPass : Status::kFail,
          "first_epoch_mrr_1=" +
              (ok ? std::to_string(*run.first_perfect_epoch) : std::string("none")) +
              " final_train_mrr=" + Fmt("%.6f", run.final_mrr)};
}

Outcome Determinism(const Context&) {
  const MemorizationRun a = Memorize();
  const MemorizationRun b = Memorize();
  const bool same = a.losses.size() == b.losses.size() &&
                    std::memcmp(a.losses.data(), b.losses.data(),
                                a.losses.size() * sizeof(double)) == 0;
  return {same && !a.losses.empty() ? Status::kPass : Status::kFail,
          "epochs=" + std::to_string(a.losses.size()) +
              " bit_identical=" + (same ? "true" : "false")};
}

// ---- 5: pattern witnesses ----

Outcome PatternWitnesses(const Context&) {
  std::string detail;
  bool ok = true;
  for (const auto& w : {ConstructSymmetric(), ConstructAsymmetric(), ConstructInverse(),
                        ConstructTemporalEvolution()}) {
    if (w.tolerance > 1e-12) ok = false;
    const WitnessResult r = VerifyWitness(w);
    ok = ok && r.passed;
    detail += std::string(ToString(w.pattern)) + "=" + (r.passed ? "pass" : "fail");
    detail += w.pattern == Pattern::kAsymmetric ? "(rate=" + Fmt("%.4f", r.asymmetry_rate) + ") "
                                                : "(gap=" + Fmt("%.1e", r.max_gap) + ") ";
    if (w.pattern == Pattern::kAsymmetric) ok = ok && r.asymmetry_rate >= 0.99;
  }
  detail.pop_back();
  return {ok ? Status::kPass : Status::kFail, detail};
}

// ---- 6 to 9: desk-scale ICEWS14 ----

struct DeskResult {
  double test_mrr = 0.0;
  fs::path checkpoint;
};

// Trains (or reuses) one desk-profile run and stores it under the artifacts dir.
DeskResult DeskRun(const Context& ctx, const Dataset& ds, const std::string& variant,
                   ScoreKind score) {
  const fs::path dir = ctx.artifacts / (variant + "_" + ToString(score));
  DeskResult result{0.0, dir / "checkpoint.tce"};
  const fs::path metric = dir / "test_mrr.txt";
  if (fs::exists(metric) && fs::exists(result.checkpoint)) {
    std::ifstream(metric) >> result.test_mrr;
    return result;
  }
  TrainConfig c = DeskTrainConfig("ICEWS14");
  c.variant = variant;
  c.score = score;
  c.threads = ctx.threads;
  Model<float> model = MakeModel<float>(c, ds);
  AdagradState<float> state(model);
  fs::create_directories(dir);
  std::ofstream log(dir / "train.log");
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) { log << FormatEpochRecord(r) << "\n" << std::flush; };
  TrainLoop(c, ds, model, state, hooks);
  SaveCheckpoint(result.checkpoint, model, state);
  result.test_mrr =
      Evaluate(model, ds.test, BuildDatasetFilter(ds), ResolveThreads(ctx.threads)).both.mrr;
  std::ofstream(metric) << Fmt("%.17g", result.test_mrr) << "\n";
  return result;
}

std::optional<Dataset> LoadIcews14(std::string* why) {
  const auto dir = Icews14(why);
  if (!dir) return std::nullopt;
  return LoadDataset(*dir, "ICEWS14");
}

Outcome DeskMrr(const Context& ctx) {
  std::string why;
  const auto ds = LoadIcews14(&why);
  if (!ds) return Blocked(why);
  const DeskResult r = DeskRun(ctx, *ds, "TCompoundE", ScoreKind::kSimilarity);
  return {r.test_mrr >= 0.50 ? Status::kPass : Status::kFail,
          "test_mrr=" + Fmt("%.4f", r.test_mrr) + " threshold=0.50"};
}

Outcome ScorerComparison(const Context& ctx) {
  std::string why;
  const auto ds = LoadIcews14(&why);
  if (!ds) return Blocked(why);
  const double sim = DeskRun(ctx, *ds, "TCompoundE", ScoreKind::kSimilarity).test_mrr;
  const double dist = DeskRun(ctx, *ds, "TCompoundE", ScoreKind::kDistance).test_mrr;
  return {sim - dist >= 0.05 ? Status::kPass : Status::kFail,
          "similarity_mrr=" + Fmt("%.4f", sim) + " distance_mrr=" + Fmt("%.4f", dist)};
}

Outcome StageRanks(const Context& ctx) {
  std::string why;
  const auto ds = LoadIcews14(&why);
  if (!ds) return Blocked(why);
  const DeskResult r = DeskRun(ctx, *ds, "TCompoundE", ScoreKind::kSimilarity);
  const Model<float> model = LoadCheckpoint<float>(r.checkpoint).model;
  std::vector<std::size_t> idx(ds->test.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Quadruple> queries;
  for (std::size_t i = 0; i < 100 && i < idx.size(); ++i) queries.push_back(ds->test[idx[i]]);
  const auto ranks = ComputeStageRanks(model, queries);
  std::vector<double> medians;
  for (std::size_t s = 0; s < ranks.front().ranks.size(); ++s) {
    std::vector<double> v;
    for (const auto& sr : ranks) v.push_back(static_cast<double>(sr.ranks[s]));
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    medians.push_back(v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]));
  }
  bool ok = medians.size() == 3;
  std::string detail = "median_ranks=";
  for (std::size_t s = 0; s < medians.size(); ++s) {
    detail += (s ? "," : "") + Fmt("%g", medians[s]);
    if (s > 0) ok = ok && medians[s] < medians[s - 1];
  }
  return {ok ? Status::kPass : Status::kFail, detail};
}

Outcome VariantOrdering(const Context& ctx) {
  std::string why;
  const auto ds = LoadIcews14(&why);
  if (!ds) return Blocked(why);
  const double full = DeskRun(ctx, *ds, "TCompoundE", ScoreKind::kSimilarity).test_mrr;
  const double v1 = DeskRun(ctx, *ds, "V1", ScoreKind::kSimilarity).test_mrr;
  const double v4 = DeskRun(ctx, *ds, "V4", ScoreKind::kSimilarity).test_mrr;
  const bool ok = full - v1 >= 0.10 && full - v4 >= 0.01;
  return {ok ? Status::kPass : Status::kFail,
          "tcompounde_mrr=" + Fmt("%.4f", full) + " v1_mrr=" + Fmt("%.4f", v1) +
              " v4_mrr=" + Fmt("%.4f", v4)};
}

struct Criterion {
  int id;
  double budget_seconds;  // 0: no budget
  std::function<Outcome(const Context&)> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> all{
      {1, 10, DatasetFidelity},    {2, 60, OracleEquivalence}, {3, 120, GradientCorrectness},
      {4, 60, Memorization},       {5, 30, PatternWitnesses},  {6, 3 * 3600, DeskMrr},
      {7, 0, ScorerComparison},    {8, 0, StageRanks},         {9, 0, VariantOrdering},
      {10, 120, Determinism}};
  return all;
}

int RunOne(const Criterion& c, const Context& ctx) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = c.run(ctx);
  } catch (const std::exception& e) {
    o = {Status::kFail, std::string("error=\"") + e.what() + "\""};
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (o.status == Status::kPass && c.budget_seconds > 0 && seconds > c.budget_seconds) {
    o.status = Status::kFail;
    o.detail += " over_budget=" + Fmt("%g", c.budget_seconds);
  }
  const char* word = o.status == Status::kPass   ? "PASS"
                     : o.status == Status::kFail ? "FAIL"
                                                 : "BLOCKED";
  std::cout << "criterion " << c.id << " " << word << " " << o.detail
            << " seconds=" << Fmt("%.2f", seconds) << std::endl;
  return o.status == Status::kPass ? 0 : o.status == Status::kFail ? 1 : kExitBlocked;
}

}  // namespace
}  // namespace tce::acceptance

int main(int argc, char** argv) {
  using namespace tce::acceptance;
  CLI::App app{"Acceptance checks"};
  std::vector<int> ids;
  Context ctx;
  std::string artifacts = "acceptance_artifacts";
  app.add_option("--criterion,-c", ids, "Criterion number(s); default all");
  app.add_option("--artifacts", artifacts, "Directory for dataset caches and desk runs");
  app.add_option("--threads", ctx.threads, "Worker threads for desk runs (0: all cores)");
  CLI11_PARSE(app, argc, argv);
  ctx.artifacts = artifacts;

  int worst = 0;
  bool any_run = false;
  for (const auto& c : Criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    any_run = true;
    const int code = RunOne(c, ctx);
    // Failure dominates blocked, blocked dominates pass.
    if (code == 1 || (code == kExitBlocked && worst == 0)) worst = code;
  }
  if (!any_run) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return worst;
}
