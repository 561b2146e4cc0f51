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

#ifndef TCE_TRAIN_H_
#define TCE_TRAIN_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tce/data.h"
#include "tce/model.h"

namespace tce {

enum class Precision : std::uint8_t { kSingle, kDouble };
const char* ToString(Precision p);
Precision ParsePrecision(const std::string& name);

struct TrainConfig {
  std::string variant = "TCompoundE";
  double learning_rate = 0.01;
  std::size_t batch_size = 1000;
  std::size_t max_epochs = 100;
  double lambda_u = 0.0025;
  double lambda_tau = 0.01;
  std::size_t dim = 256;
  std::size_t eval_every = 5;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  Precision precision = Precision::kSingle;
  Fusion fusion = Fusion::kVector;
  ScoreKind score = ScoreKind::kSimilarity;
  double init_scale = 0.01;
  bool init_scale_at_identity = false;
  // Which time tables the smoothing term covers.
  bool smooth_translate = true;
  bool smooth_scale = true;
  bool smooth_rotate = true;
  std::size_t threads = 0;  // 0: hardware concurrency
};

// Full-scale hyperparameters for "ICEWS14", "ICEWS05-15" and "GDELT".
TrainConfig FullTrainConfig(const std::string& dataset);
// Scaled-down CPU profile for the same datasets.
TrainConfig DeskTrainConfig(const std::string& dataset);

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense gradient buffers shaped like a model's tables; records touched rows.
class DenseGrad : public GradSink {
 public:
  template <class Real>
  explicit DenseGrad(const Model<Real>& model) {
    for (std::size_t t = 0; t < kNumTables; ++t) {
      const auto id = static_cast<TableId>(t);
      values_[t] = EmbeddingTable<double>(model.table(id).rows(), model.table(id).cols());
      touched_[t].assign(model.table(id).rows(), 0);
    }
  }

  void Add(TableId table, std::size_t row, std::span<const double> values) override;
  void Reset();

  EmbeddingTable<double>& values(TableId id) { return values_[static_cast<std::size_t>(id)]; }
  const EmbeddingTable<double>& values(TableId id) const {
    return values_[static_cast<std::size_t>(id)];
  }
  const std::vector<std::size_t>& touched_rows(TableId id) const {
    return touched_rows_[static_cast<std::size_t>(id)];
  }
  void MarkTouched(TableId id, std::size_t row);

 private:
  std::array<EmbeddingTable<double>, kNumTables> values_;
  std::array<std::vector<std::uint8_t>, kNumTables> touched_;
  std::array<std::vector<std::size_t>, kNumTables> touched_rows_;
};

template <class Real>
struct AdagradState {
  std::array<EmbeddingTable<Real>, kNumTables> accumulators;
  double epsilon = 1e-10;

  AdagradState() = default;
  explicit AdagradState(const Model<Real>& model) {
    for (std::size_t t = 0; t < kNumTables; ++t) {
      const auto& table = model.tables()[t];
      accumulators[t] = EmbeddingTable<Real>(table.rows(), table.cols());
    }
  }
};

struct BatchLoss {
  double loss = 0.0;           // mean of (cross entropy + lambda_u * N3)
  double cross_entropy = 0.0;  // mean cross entropy
  double n3 = 0.0;             // mean unweighted N3 term
};

// Reciprocal cross entropy over all candidate tails plus the N3 penalty on
// head, relation vector and tail. `batch` holds augmented facts. Gradients of
// the returned loss are added to `grad` when it is not null.
template <class Real>
BatchLoss ComputeBatchLoss(const Model<Real>& model, std::span<const Quadruple> batch,
                           double lambda_u, DenseGrad* grad, std::size_t threads = 1);

struct SmoothMask {
  bool translate = true;
  bool scale = true;
  bool rotate = true;
};

// Mean cube-norm of differences between neighbouring timestamp rows, summed
// over the masked time tables. Adds `weight` times its gradient to `grad`.
template <class Real>
double TemporalSmoothness(const Model<Real>& model, const SmoothMask& mask,
                          DenseGrad* grad, double weight = 1.0);

// Standard Adagrad on the touched rows of `grad`.
template <class Real>
void AdagradStep(Model<Real>& model, AdagradState<Real>& state, const DenseGrad& grad,
                 double learning_rate);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double cross_entropy = 0.0;
  double n3 = 0.0;
  double temporal = 0.0;
  double seconds = 0.0;
  std::optional<double> valid_mrr;
};

// One line of the training report: "epoch=3 loss=... valid_mrr=...".
std::string FormatEpochRecord(const EpochRecord& record);

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::optional<double> best_valid_mrr;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  // Called with the epoch number whenever validation MRR improves.
  std::function<void(std::size_t)> on_improvement;
};

// Runs the epoch loop on `dataset.train`. When a validation split is present
// the model and state are restored to the best-validation snapshot on return.
template <class Real>
TrainReport TrainLoop(const TrainConfig& config, const Dataset& dataset, Model<Real>& model,
                      AdagradState<Real>& state, const TrainHooks& hooks = {});

// Model sized for `dataset` and initialized per `config`.
template <class Real>
Model<Real> MakeModel(const TrainConfig& config, const Dataset& dataset);

std::size_t ResolveThreads(std::size_t requested);

}  // namespace tce

#endif  // TCE_TRAIN_H_
