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

#include "tce/eval.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "batch.h"
#include "tce/io.h"

namespace tce {

const char* ToString(Direction d) {
  switch (d) {
    case Direction::kTail: return "tail";
    case Direction::kHead: return "head";
    case Direction::kBoth: return "both";
  }
  return "?";
}

RankingReport RankingReport::FromRanks(std::span<const std::size_t> ranks,
                                       Direction direction) {
  RankingReport r;
  r.direction = direction;
  r.count = ranks.size();
  if (ranks.empty()) return r;
  // Fixed-order reduction.
  for (std::size_t rank : ranks) {
    r.mrr += 1.0 / static_cast<double>(rank);
    r.hits1 += rank <= 1 ? 1.0 : 0.0;
    r.hits3 += rank <= 3 ? 1.0 : 0.0;
    r.hits10 += rank <= 10 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(ranks.size());
  r.mrr /= n;
  r.hits1 /= n;
  r.hits3 /= n;
  r.hits10 /= n;
  return r;
}

std::size_t FilteredRank(std::span<const double> scores, Id target,
                         std::span<const Id> filtered) {
  const double gold = scores[target];
  std::size_t greater = 0, ties = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == target) continue;
    if (scores[j] > gold) ++greater;
    else if (scores[j] == gold) ++ties;
  }
  Id previous = static_cast<Id>(-1);
  for (Id f : filtered) {
    if (f == target || f == previous || f >= scores.size()) continue;
    previous = f;
    if (scores[f] > gold) --greater;
    else if (scores[f] == gold) --ties;
  }
  return 1 + greater + (ties + 1) / 2;
}

FilterIndex BuildDatasetFilter(const Dataset& dataset) {
  const std::size_t r = dataset.vocab.num_relations();
  const std::vector<Quadruple> splits[] = {AugmentReciprocal(dataset.train, r),
                                           AugmentReciprocal(dataset.valid, r),
                                           AugmentReciprocal(dataset.test, r)};
  return BuildFilterIndex(splits);
}

template <class Real>
SplitRanking Evaluate(const Model<Real>& model, std::span<const Quadruple> facts,
                      const FilterIndex& filter, std::size_t threads) {
  if (facts.empty()) throw std::invalid_argument("cannot evaluate an empty split");
  const std::vector<Quadruple> queries =
      AugmentReciprocal(facts, model.shape().num_relations);
  for (const auto& q : queries) model.CheckQuadruple(q);

  SplitRanking out;
  out.ranks.resize(queries.size());
  constexpr std::size_t kChunk = 1024;
  std::vector<typename Model<Real>::Workspace> workspaces;
  internal::RowMatrix<Real> heads;
  internal::RowMatrix<double> scores;
  for (std::size_t begin = 0; begin < queries.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, queries.size() - begin);
    const auto chunk = std::span<const Quadruple>(queries).subspan(begin, n);
    internal::TransformHeads(model, chunk, workspaces, heads, threads);
    internal::ScoreMatrix(model, heads, scores, threads);
    internal::ParallelFor(n, threads, [&](std::size_t i) {
      const auto& q = chunk[i];
      const std::span<const double> row(scores.row(static_cast<Eigen::Index>(i)).data(),
                                        static_cast<std::size_t>(scores.cols()));
      out.ranks[begin + i] = FilteredRank(row, q.tail, filter.Tails(q.head, q.rel, q.time));
    });
  }

  std::vector<std::size_t> tail_ranks, head_ranks;
  for (std::size_t i = 0; i < out.ranks.size(); ++i)
    (i % 2 == 0 ? tail_ranks : head_ranks).push_back(out.ranks[i]);
  out.tail = RankingReport::FromRanks(tail_ranks, Direction::kTail);
  out.head = RankingReport::FromRanks(head_ranks, Direction::kHead);
  out.both = RankingReport::FromRanks(out.ranks, Direction::kBoth);
  return out;
}

std::string FormatRanking(const SplitRanking& ranking) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %8s %8s\n", "direction", "n", "mrr",
                "hits@1", "hits@3", "hits@10");
  os << line;
  for (const auto* r : {&ranking.tail, &ranking.head, &ranking.both}) {
    std::snprintf(line, sizeof line, "%-10s %8zu %8.4f %8.4f %8.4f %8.4f\n",
                  ToString(r->direction), r->count, r->mrr, r->hits1, r->hits3, r->hits10);
    os << line;
  }
  const auto& b = ranking.both;
  std::snprintf(line, sizeof line, "mrr=%.6f\nhits1=%.6f\nhits3=%.6f\nhits10=%.6f\nn=%zu\n",
                b.mrr, b.hits1, b.hits3, b.hits10, b.count);
  os << line;
  return os.str();
}

template <class Real>
std::vector<StageRank> ComputeStageRanks(const Model<Real>& model,
                                         std::span<const Quadruple> queries) {
  std::vector<StageRank> out;
  out.reserve(queries.size());
  std::vector<double> scores(model.shape().num_entities);
  for (const auto& q : queries) {
    model.CheckQuadruple(q);
    StageRank sr{q, {}};
    for (const auto& stage : model.Stages(q.head, q.rel, q.time)) {
      model.ScoreAllTails(stage, scores);
      sr.ranks.push_back(FilteredRank(scores, q.tail));
    }
    out.push_back(std::move(sr));
  }
  return out;
}

ExportFormat ParseExportFormat(const std::string& name) {
  if (name == "tsv") return ExportFormat::kTsv;
  if (name == "binary") return ExportFormat::kBinary;
  throw std::invalid_argument("unknown export format '" + name + "'");
}

TableId ParseTableSelector(const std::string& name) {
  if (name == "entities") return TableId::kEntity;
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    if (name == TableName(id)) return id;
  }
  throw std::invalid_argument(name.empty() ? "empty table selector"
                                           : "unknown table selector '" + name + "'");
}

namespace {

struct ExportRow {
  std::size_t id;
  std::string label;
  std::vector<double> values;
};

void WriteRows(const std::vector<ExportRow>& rows, std::size_t cols,
               const std::filesystem::path& path, ExportFormat format) {
  if (format == ExportFormat::kBinary) {
    BinaryWriter w(path);
    w.Magic("TCX1");
    w.U32(1);
    w.U32(static_cast<std::uint32_t>(rows.size()));
    w.U32(static_cast<std::uint32_t>(cols));
    for (const auto& r : rows) {
      w.U32(static_cast<std::uint32_t>(r.id));
      w.String(r.label);
      w.Floats<double>(r.values);
    }
    w.Commit();
    return;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  char buf[32];
  for (const auto& r : rows) {
    out << r.id << '\t' << r.label;
    for (double v : r.values) {
      std::snprintf(buf, sizeof buf, "\t%.9g", v);
      out << buf;
    }
    out << '\n';
  }
  if (!out.flush()) throw IoError("write to '" + path.string() + "' failed");
}

template <class Real>
std::vector<double> Widen(std::span<const Real> v) {
  return {v.begin(), v.end()};
}

}  // namespace

template <class Real>
void ExportTable(const Model<Real>& model, TableId table,
                 std::span<const std::string> labels, const std::filesystem::path& path,
                 ExportFormat format) {
  const auto& t = model.table(table);
  if (!model.UsesTable(table))
    throw std::invalid_argument(std::string("variant has no '") + TableName(table) + "' table");
  std::vector<ExportRow> rows;
  rows.reserve(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::string label = i < labels.size() ? labels[i] : std::to_string(i);
    rows.push_back({i, std::move(label), Widen<Real>(t.row(i))});
  }
  WriteRows(rows, t.cols(), path, format);
}

template <class Real>
void ExportStages(const Model<Real>& model, std::span<const Quadruple> queries,
                  const Vocabulary* vocab, const std::filesystem::path& path,
                  ExportFormat format) {
  auto name = [&](Id e) { return vocab ? vocab->entity(e) : std::to_string(e); };
  std::vector<std::string> stage_names{"raw"};
  for (const auto& step : model.steps()) {
    stage_names.push_back(std::string(step.source == ParamSource::kTime ? "time_" : "") +
                          ToString(step.kind));
  }
  std::vector<ExportRow> rows;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    model.CheckQuadruple(q);
    const auto stages = model.Stages(q.head, q.rel, q.time);
    for (std::size_t s = 0; s < stages.size(); ++s)
      rows.push_back({i, stage_names[s] + ":" + name(q.head), Widen<Real>(stages[s])});
    rows.push_back({i, "tail:" + name(q.tail),
                    Widen<Real>(model.table(TableId::kEntity).row(q.tail))});
  }
  WriteRows(rows, model.shape().dim, path, format);
}

#define TCE_INSTANTIATE(Real)                                                             \
  template SplitRanking Evaluate<Real>(const Model<Real>&, std::span<const Quadruple>,    \
                                       const FilterIndex&, std::size_t);                  \
  template std::vector<StageRank> ComputeStageRanks<Real>(const Model<Real>&,             \
                                                          std::span<const Quadruple>);    \
  template void ExportTable<Real>(const Model<Real>&, TableId, std::span<const std::string>, \
                                  const std::filesystem::path&, ExportFormat);            \
  template void ExportStages<Real>(const Model<Real>&, std::span<const Quadruple>,        \
                                   const Vocabulary*, const std::filesystem::path&,       \
                                   ExportFormat);
TCE_INSTANTIATE(float)
TCE_INSTANTIATE(double)
#undef TCE_INSTANTIATE

}  // namespace tce
