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

#ifndef TCE_EVAL_H_
#define TCE_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tce/data.h"
#include "tce/model.h"

namespace tce {

enum class Direction { kTail, kHead, kBoth };
const char* ToString(Direction d);

struct RankingReport {
  Direction direction = Direction::kBoth;
  std::size_t count = 0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;

  static RankingReport FromRanks(std::span<const std::size_t> ranks, Direction direction);
};

struct SplitRanking {
  RankingReport tail, head, both;
  // Per fact: the tail-query rank, then the head-query rank.
  std::vector<std::size_t> ranks;
};

// 1 + #{candidates scoring strictly higher} + ceil(#{ties} / 2), ignoring
// every id in `filtered` other than `target`. `filtered` must be sorted.
std::size_t FilteredRank(std::span<const double> scores, Id target,
                         std::span<const Id> filtered = {});

// Filtered ranking of `facts` (not augmented): each fact is asked as a tail
// query and, through its reciprocal relation, as a head query.
template <class Real>
SplitRanking Evaluate(const Model<Real>& model, std::span<const Quadruple> facts,
                      const FilterIndex& filter, std::size_t threads = 1);

// Filter over every split of `dataset`, reciprocal-augmented.
FilterIndex BuildDatasetFilter(const Dataset& dataset);

// Aligned table followed by key=value lines (mrr=, hits1=, hits3=, hits10=, n=).
std::string FormatRanking(const SplitRanking& ranking);

struct StageRank {
  Quadruple query;
  std::vector<std::size_t> ranks;  // one per stage, unfiltered
};

// Rank of the gold tail when the left operand of the score is the head after
// each lowered step (raw entity first). TCompoundE yields three stages.
template <class Real>
std::vector<StageRank> ComputeStageRanks(const Model<Real>& model,
                                         std::span<const Quadruple> queries);

enum class ExportFormat { kTsv, kBinary };
ExportFormat ParseExportFormat(const std::string& name);
TableId ParseTableSelector(const std::string& name);

// Rows "id<TAB>label<TAB>v0<TAB>v1...". `labels` may be empty (ids used).
template <class Real>
void ExportTable(const Model<Real>& model, TableId table,
                 std::span<const std::string> labels, const std::filesystem::path& path,
                 ExportFormat format);

// For each query: one row per stage followed by the gold tail row.
template <class Real>
void ExportStages(const Model<Real>& model, std::span<const Quadruple> queries,
                  const Vocabulary* vocab, const std::filesystem::path& path,
                  ExportFormat format);

}  // namespace tce

#endif  // TCE_EVAL_H_
