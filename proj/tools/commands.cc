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

#include "commands.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "run_config.h"
#include "tce/data.h"
#include "tce/eval.h"
#include "tce/io.h"
#include "tce/model.h"
#include "tce/patterns.h"
#include "tce/train.h"

namespace tce::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string MetricsLine(const RankingReport& r) {
  return "mrr=" + Fmt("%.6f", r.mrr) + " hits1=" + Fmt("%.6f", r.hits1) +
         " hits3=" + Fmt("%.6f", r.hits3) + " hits10=" + Fmt("%.6f", r.hits10);
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text).flush()) throw IoError("cannot write '" + path.string() + "'");
}

Dataset LoadData(const std::string& path, std::ostream& err) {
  if (path.empty()) throw UsageError("no dataset given (--dataset)");
  Dataset ds = LoadDatasetAuto(ResolveDataPath(path));
  for (const auto& w : ds.warnings) err << "warning: " << w << "\n";
  return ds;
}

// Throws UsageError naming both shapes when they disagree.
void CheckShape(const CheckpointHeader& h, const Dataset& ds, std::optional<std::size_t> dim) {
  const auto& s = h.shape;
  const bool dim_ok = !dim || *dim == s.dim;
  if (dim_ok && s.num_entities == ds.vocab.num_entities() &&
      s.num_relations == ds.vocab.num_relations() && s.num_times == ds.vocab.num_times())
    return;
  throw UsageError("checkpoint dims d=" + std::to_string(s.dim) +
                   " |E|=" + std::to_string(s.num_entities) +
                   " 2|R|=" + std::to_string(s.augmented_relations()) +
                   " |T|=" + std::to_string(s.num_times) + " do not match " +
                   (dim_ok ? std::string() : "d=" + std::to_string(*dim) + " ") + "dataset |E|=" +
                   std::to_string(ds.vocab.num_entities()) +
                   " 2|R|=" + std::to_string(2 * ds.vocab.num_relations()) +
                   " |T|=" + std::to_string(ds.vocab.num_times()));
}

// Checkpoint model, optionally re-targeted to another scorer.
Model<float> LoadModel(const std::string& path, std::optional<ScoreKind> scorer) {
  Checkpoint<float> ckpt = LoadCheckpoint<float>(ResolveDataPath(path));
  if (!scorer || *scorer == ckpt.model.options().score) return std::move(ckpt.model);
  ModelOptions options = ckpt.model.options();
  options.score = *scorer;
  Model<float> model(ckpt.model.shape(), options);
  model.tables() = ckpt.model.tables();
  return model;
}

const std::vector<Quadruple>& Split(const Dataset& ds, const std::string& name) {
  if (name == "train") return ds.train;
  if (name == "valid") return ds.valid;
  if (name == "test") return ds.test;
  throw UsageError("unknown split '" + name + "' (expected train, valid or test)");
}

std::vector<Quadruple> SampleFacts(const std::vector<Quadruple>& facts, std::size_t n,
                                   std::uint64_t seed) {
  std::vector<std::size_t> idx(facts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n, idx.size()));
  std::vector<Quadruple> out;
  for (std::size_t i : idx) out.push_back(facts[i]);
  return out;
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---- preprocess ----

struct PreprocessArgs {
  std::string dataset, out, name;
};

int Preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
  const auto dir = ResolveDataPath(a.dataset);
  Dataset ds = LoadDataset(dir, a.name);
  for (const auto& w : ds.warnings) err << "warning: " << w << "\n";
  const std::string path = a.out.empty() ? ds.name + ".tcd" : a.out;
  SaveDatasetCache(path, ds);
  out << "dataset=" << ds.name << "\n"
      << "entities=" << ds.vocab.num_entities() << "\n"
      << "relations=" << ds.vocab.num_relations() << "\n"
      << "timestamps=" << ds.vocab.num_times() << "\n"
      << "train=" << ds.train.size() << "\n"
      << "valid=" << ds.valid.size() << "\n"
      << "test=" << ds.test.size() << "\n"
      << "cache=" << path << "\n";
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string config;
  std::map<std::string, std::string> flags;
};

struct RunResult {
  std::optional<SplitRanking> test;
};

template <class Real>
RunResult TrainOnce(const TrainConfig& config, const Dataset& ds,
                    const std::filesystem::path& dir, const std::string& tag, std::ostream& out) {
  Model<Real> model = MakeModel<Real>(config, ds);
  AdagradState<Real> state(model);
  std::ofstream log(dir / "train.log", std::ios::trunc);
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    const std::string line = FormatEpochRecord(r);
    out << tag << line << "\n" << std::flush;
    log << line << "\n" << std::flush;
  };
  const TrainReport report = TrainLoop(config, ds, model, state, hooks);
  SaveCheckpoint(dir / "checkpoint.tce", model, state);
  out << tag << "best_epoch=" << report.best_epoch
      << (report.stopped_early ? " stopped_early=true" : "") << "\n";

  RunResult result;
  if (!ds.test.empty()) {
    const FilterIndex filter = BuildDatasetFilter(ds);
    result.test = Evaluate(model, ds.test, filter, ResolveThreads(config.threads));
    WriteText(dir / "test_metrics.txt", FormatRanking(*result.test));
  }
  return result;
}

int Train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  std::map<std::string, std::string> values;
  if (!a.config.empty()) values = ReadKeyValueFile(a.config);
  for (const auto& [k, v] : a.flags) values[k] = v;
  RunConfig rc;
  ApplyKeyValues(values, rc);
  if (rc.runs == 0) throw UsageError("--runs must be at least 1");

  const Dataset ds = LoadData(rc.dataset, err);
  const std::filesystem::path root(rc.out);
  std::filesystem::create_directories(root);
  WriteText(root / "config.cfg", FormatRunConfig(rc));

  std::vector<RankingReport> finals;
  for (std::size_t k = 0; k < rc.runs; ++k) {
    TrainConfig config = rc.train;
    config.seed = rc.train.seed + k;
    const std::filesystem::path dir = rc.runs == 1 ? root : root / ("run" + std::to_string(k));
    std::filesystem::create_directories(dir);
    const std::string tag = rc.runs == 1 ? "" : "run=" + std::to_string(k) + " ";
    const RunResult r = config.precision == Precision::kDouble
                            ? TrainOnce<double>(config, ds, dir, tag, out)
                            : TrainOnce<float>(config, ds, dir, tag, out);
    if (r.test) {
      out << "run=" << k << " seed=" << config.seed << " " << MetricsLine(r.test->both) << "\n";
      finals.push_back(r.test->both);
    }
  }
  if (!finals.empty()) {
    RankingReport mean;
    for (const auto& f : finals) {
      mean.mrr += f.mrr / static_cast<double>(finals.size());
      mean.hits1 += f.hits1 / static_cast<double>(finals.size());
      mean.hits3 += f.hits3 / static_cast<double>(finals.size());
      mean.hits10 += f.hits10 / static_cast<double>(finals.size());
    }
    const std::string line = "mean runs=" + std::to_string(finals.size()) + " " + MetricsLine(mean);
    out << line << "\n";
    WriteText(root / "summary.txt", line + "\n");
  }
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string checkpoint, dataset, split = "test", scorer;
  std::optional<std::size_t> dim;
  std::size_t threads = 0;
};

int Eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset ds = LoadData(a.dataset, err);
  CheckShape(ReadCheckpointHeader(ResolveDataPath(a.checkpoint)), ds, a.dim);
  std::optional<ScoreKind> scorer;
  if (!a.scorer.empty()) scorer = ParseScoreKind(a.scorer);
  const Model<float> model = LoadModel(a.checkpoint, scorer);
  const FilterIndex filter = BuildDatasetFilter(ds);
  const SplitRanking ranking = Evaluate(model, Split(ds, a.split), filter, ResolveThreads(a.threads));
  out << FormatRanking(ranking);
  return kExitOk;
}

// ---- check-patterns ----

struct PatternArgs {
  std::string checkpoint, dataset;
  bool allow_zero_scale = false;
  double tol = 1e-6;
  std::size_t samples = 20;
  std::size_t dim = 16;
  std::size_t pairs = 1000;
  std::uint64_t seed = 0;
};

int CheckPatterns(const PatternArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.checkpoint.empty()) {
    const Dataset ds = LoadData(a.dataset, err);
    CheckShape(ReadCheckpointHeader(ResolveDataPath(a.checkpoint)), ds, std::nullopt);
    const Model<float> model = LoadModel(a.checkpoint, std::nullopt);
    DetectOptions options;
    options.tolerance = a.tol;
    options.samples_per_relation = a.samples;
    options.seed = a.seed;
    for (const auto& r : DetectPatterns(model, ds, options)) out << FormatPatternReport(r) << "\n";
    return kExitOk;
  }
  const WitnessOptions wo{a.dim, a.seed};
  VerifyOptions vo;
  vo.pairs = a.pairs;
  vo.seed = a.seed + 1;
  const PatternWitness witnesses[] = {
      ConstructSymmetric(wo), ConstructAsymmetric(wo, a.allow_zero_scale),
      ConstructInverse(wo), ConstructTemporalEvolution(wo)};
  std::size_t passed = 0, failed = 0, excluded = 0;
  for (const auto& w : witnesses) {
    const WitnessResult r = VerifyWitness(w, vo);
    out << FormatWitnessResult(r) << "\n";
    (r.excluded ? excluded : r.passed ? passed : failed)++;
  }
  out << "passed=" << passed << " failed=" << failed << " excluded=" << excluded << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---- export ----

struct ExportArgs {
  std::string checkpoint, dataset, what = "entities", format = "tsv", out, split = "test";
  bool stages = false;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
};

int Export(const ExportArgs& a, std::ostream& out, std::ostream& err) {
  if (a.out.empty()) throw UsageError("no output path given (--out)");
  const ExportFormat format = ParseExportFormat(a.format);
  std::optional<Dataset> ds;
  if (!a.dataset.empty()) {
    ds = LoadData(a.dataset, err);
    CheckShape(ReadCheckpointHeader(ResolveDataPath(a.checkpoint)), *ds, std::nullopt);
  }
  const Model<float> model = LoadModel(a.checkpoint, std::nullopt);

  if (a.stages) {
    if (!ds) throw UsageError("--stages needs --dataset");
    const auto queries = SampleFacts(Split(*ds, a.split), a.samples, a.seed);
    const auto ranks = ComputeStageRanks(model, queries);
    ExportStages(model, queries, &ds->vocab, a.out, format);
    std::vector<std::vector<double>> per_stage;
    for (const auto& sr : ranks) {
      out << "stage_rank head=" << sr.query.head << " rel=" << sr.query.rel
          << " tail=" << sr.query.tail << " time=" << sr.query.time << " ranks=";
      per_stage.resize(sr.ranks.size());
      for (std::size_t s = 0; s < sr.ranks.size(); ++s) {
        out << (s ? "," : "") << sr.ranks[s];
        per_stage[s].push_back(static_cast<double>(sr.ranks[s]));
      }
      out << "\n";
    }
    out << "median_ranks=";
    for (std::size_t s = 0; s < per_stage.size(); ++s)
      out << (s ? "," : "") << Fmt("%g", Median(per_stage[s]));
    out << "\n";
    return kExitOk;
  }

  const TableId table = ParseTableSelector(a.what);
  std::vector<std::string> labels;
  if (ds) {
    const std::size_t rows = model.table(table).rows();
    for (std::size_t i = 0; i < rows; ++i) {
      const auto id = static_cast<Id>(i);
      switch (table) {
        case TableId::kEntity: labels.push_back(ds->vocab.entity(id)); break;
        case TableId::kRelTranslate:
        case TableId::kRelScale:
        case TableId::kRelRotate: labels.push_back(ds->vocab.relation(id)); break;
        default: labels.push_back(ds->vocab.timestamp(id)); break;
      }
    }
  }
  ExportTable(model, table, labels, a.out, format);
  out << "rows=" << model.table(table).rows() << " cols=" << model.table(table).cols()
      << " out=" << a.out << "\n";
  return kExitOk;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const DataError*>(&e) || dynamic_cast<const IdError*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const GeometryError*>(&e))
    return kExitUsage;
  return kExitFailure;
}

}  // namespace

std::filesystem::path ResolveDataPath(const std::string& path) {
  const std::filesystem::path p(path);
  if (std::filesystem::exists(p)) return p;
  const char* root = std::getenv("TCE_DATA_DIR");
  if (root != nullptr && *root != '\0' && p.is_relative()) {
    const auto candidate = std::filesystem::path(root) / p;
    if (std::filesystem::exists(candidate)) return candidate;
    throw UsageError("'" + path + "' not found (also looked in TCE_DATA_DIR=" + root + ")");
  }
  throw UsageError("'" + path + "' not found");
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TCompoundE temporal knowledge graph embeddings", "tcompounde"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  std::function<int()> action;

  PreprocessArgs pre;
  auto* cmd_pre = app.add_subcommand("preprocess", "Encode a TSV dataset into a TCD1 cache");
  cmd_pre->add_option("dataset", pre.dataset, "Directory with train/valid/test")->required();
  cmd_pre->add_option("--out,-o", pre.out, "Cache file (default <name>.tcd)");
  cmd_pre->add_option("--name", pre.name, "Dataset name (default directory name)");
  cmd_pre->callback([&] { action = [&] { return Preprocess(pre, out, err); }; });

  TrainArgs train;
  std::map<std::string, std::string> train_flags;
  auto* cmd_train = app.add_subcommand("train", "Train a model and report test metrics");
  cmd_train->add_option("--config,-c", train.config, "Flat key=value config file");
  cmd_train->add_option("--profile", train_flags["profile"], "desk or full hyperparameters")
      ->check(CLI::IsMember({"desk", "full"}));
  std::vector<std::string> keys = ConfigKeys();
  for (const auto& key : keys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cmd_train->add_option(flag, train_flags[key], "config key '" + key + "'");
  }
  cmd_train->callback([&] {
    for (const auto& key : keys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (cmd_train->count(flag)) train.flags[key] = train_flags[key];
    }
    if (cmd_train->count("--profile")) train.flags["profile"] = train_flags["profile"];
    action = [&] { return Train(train, out, err); };
  });

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval", "Filtered ranking metrics of a checkpoint");
  cmd_eval->add_option("--checkpoint", ev.checkpoint)->required();
  cmd_eval->add_option("--dataset", ev.dataset)->required();
  cmd_eval->add_option("--split", ev.split)->check(CLI::IsMember({"train", "valid", "test"}));
  cmd_eval->add_option("--scorer", ev.scorer, "Override the checkpoint scorer")
      ->check(CLI::IsMember({"similarity", "distance"}));
  cmd_eval->add_option("--d", ev.dim, "Expected embedding dimension");
  cmd_eval->callback([&] {
    ev.threads = threads;
    action = [&] { return Eval(ev, out, err); };
  });

  PatternArgs pat;
  auto* cmd_pat = app.add_subcommand("check-patterns",
                                     "Verify pattern witnesses or report learned patterns");
  cmd_pat->add_option("--checkpoint", pat.checkpoint);
  cmd_pat->add_option("--dataset", pat.dataset);
  cmd_pat->add_flag("--allow-zero-scale", pat.allow_zero_scale,
                    "Use a zero fused scale for the asymmetric witness");
  cmd_pat->add_option("--tol", pat.tol, "Detection tolerance");
  cmd_pat->add_option("--samples", pat.samples, "Facts sampled per relation");
  cmd_pat->add_option("--dim", pat.dim, "Witness dimension");
  cmd_pat->add_option("--pairs", pat.pairs, "Entity pairs per witness");
  cmd_pat->add_option("--seed", pat.seed);
  cmd_pat->callback([&] { action = [&] { return CheckPatterns(pat, out, err); }; });

  ExportArgs ex;
  auto* cmd_ex = app.add_subcommand("export", "Export embedding tables or stage vectors");
  cmd_ex->add_option("--checkpoint", ex.checkpoint)->required();
  cmd_ex->add_option("--dataset", ex.dataset, "Dataset for labels");
  cmd_ex->add_option("--what", ex.what, "entities or a table name");
  cmd_ex->add_option("--format", ex.format)->check(CLI::IsMember({"tsv", "binary"}));
  cmd_ex->add_option("--out,-o", ex.out)->required();
  cmd_ex->add_flag("--stages", ex.stages, "Export per-stage head vectors and ranks");
  cmd_ex->add_option("--samples", ex.samples, "Quadruples sampled for --stages");
  cmd_ex->add_option("--split", ex.split)->check(CLI::IsMember({"train", "valid", "test"}));
  cmd_ex->add_option("--seed", ex.seed);
  cmd_ex->callback([&] { action = [&] { return Export(ex, out, err); }; });

  for (auto* sub : {cmd_eval, cmd_pat, cmd_ex})
    sub->add_option("--threads", threads, "Worker threads (0: all cores)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
}

}  // namespace tce::cli
