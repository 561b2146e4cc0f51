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

#include "tce/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "batch.h"
#include "tce/eval.h"

namespace tce {

const char* ToString(Precision p) { return p == Precision::kSingle ? "single" : "double"; }

Precision ParsePrecision(const std::string& name) {
  if (name == "single") return Precision::kSingle;
  if (name == "double") return Precision::kDouble;
  throw std::invalid_argument("unknown precision '" + name + "'");
}

TrainConfig FullTrainConfig(const std::string& dataset) {
  TrainConfig c;
  if (dataset == "ICEWS14") {
    c.learning_rate = 0.01, c.dim = 6000, c.batch_size = 4000, c.max_epochs = 400;
    c.lambda_u = 0.0025, c.lambda_tau = 0.01;
  } else if (dataset == "ICEWS05-15") {
    c.learning_rate = 0.08, c.dim = 8000, c.batch_size = 6000, c.max_epochs = 100;
    c.lambda_u = 0.002, c.lambda_tau = 0.1;
  } else if (dataset == "GDELT") {
    c.learning_rate = 0.35, c.dim = 6000, c.batch_size = 2000, c.max_epochs = 50;
    c.lambda_u = 0.001, c.lambda_tau = 0.001;
  } else {
    throw std::invalid_argument("no hyperparameter profile for dataset '" + dataset + "'");
  }
  return c;
}

TrainConfig DeskTrainConfig(const std::string& dataset) {
  TrainConfig c = FullTrainConfig(dataset);
  if (dataset == "ICEWS14") {
    c.dim = 256, c.max_epochs = 100, c.batch_size = 1000, c.learning_rate = 0.05;
  } else if (dataset == "ICEWS05-15") {
    c.dim = 256, c.max_epochs = 30, c.batch_size = 2000, c.learning_rate = 0.1;
  } else {
    c.dim = 256, c.max_epochs = 10, c.batch_size = 2000;
  }
  return c;
}

std::size_t ResolveThreads(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void DenseGrad::MarkTouched(TableId id, std::size_t row) {
  const auto t = static_cast<std::size_t>(id);
  if (!touched_[t][row]) {
    touched_[t][row] = 1;
    touched_rows_[t].push_back(row);
  }
}

void DenseGrad::Add(TableId table, std::size_t row, std::span<const double> values) {
  auto dst = values_[static_cast<std::size_t>(table)].row(row);
  for (std::size_t i = 0; i < values.size(); ++i) dst[i] += values[i];
  MarkTouched(table, row);
}

void DenseGrad::Reset() {
  for (std::size_t t = 0; t < kNumTables; ++t) {
    for (std::size_t row : touched_rows_[t]) {
      auto r = values_[t].row(row);
      std::fill(r.begin(), r.end(), 0.0);
      touched_[t][row] = 0;
    }
    touched_rows_[t].clear();
  }
}

namespace {

template <class Real>
double CubeNorm(std::span<const Real> v) {
  double acc = 0.0;
  for (Real x : v) acc += std::abs(static_cast<double>(x)) * static_cast<double>(x) *
                          static_cast<double>(x);
  return acc;
}

// d/dx sum |x|^3 = 3 x |x|, scaled.
template <class Real>
void CubeNormGrad(std::span<const Real> v, double scale, std::vector<double>& out) {
  out.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = static_cast<double>(v[i]);
    out[i] = scale * 3.0 * x * std::abs(x);
  }
}

}  // namespace

template <class Real>
BatchLoss ComputeBatchLoss(const Model<Real>& model, std::span<const Quadruple> batch,
                           double lambda_u, DenseGrad* grad, std::size_t threads) {
  using internal::RowMatrix;
  BatchLoss result;
  if (batch.empty()) return result;
  for (const auto& q : batch) model.CheckQuadruple(q);

  const std::size_t n = batch.size();
  const std::size_t dim = model.shape().dim;
  const std::size_t num_entities = model.shape().num_entities;
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool similarity = model.options().score == ScoreKind::kSimilarity;

  std::vector<typename Model<Real>::Workspace> ws;
  RowMatrix<Real> heads;
  internal::TransformHeads(model, batch, ws, heads, threads);
  RowMatrix<double> scores;
  internal::ScoreMatrix(model, heads, scores, threads);
  // Distances, kept for the gradient once scores are overwritten.
  RowMatrix<double> distances;
  if (!similarity && grad != nullptr) distances = -scores;

  // Softmax cross entropy per row, overwriting scores with d loss / d score.
  std::vector<double> ce(n);
  internal::ParallelFor(n, threads, [&](std::size_t i) {
    double* z = scores.row(static_cast<Eigen::Index>(i)).data();
    const double zmax = *std::max_element(z, z + num_entities);
    double sum = 0.0;
    for (std::size_t e = 0; e < num_entities; ++e) sum += std::exp(z[e] - zmax);
    const double lse = zmax + std::log(sum);
    ce[i] = lse - z[batch[i].tail];
    for (std::size_t e = 0; e < num_entities; ++e) z[e] = std::exp(z[e] - zmax) / sum * inv_n;
    z[batch[i].tail] -= inv_n;
  });

  std::vector<double> n3(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entity = model.table(TableId::kEntity);
    n3[i] = CubeNorm<Real>(entity.row(batch[i].head)) +
            CubeNorm<Real>(ws[i].relation_sum) + CubeNorm<Real>(entity.row(batch[i].tail));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(ce[i]) || !std::isfinite(n3[i]))
      throw TrainError("non-finite loss at batch example " + std::to_string(i));
    result.cross_entropy += ce[i];
    result.n3 += n3[i];
  }
  result.cross_entropy *= inv_n;
  result.n3 *= inv_n;
  result.loss = result.cross_entropy + lambda_u * result.n3;
  if (grad == nullptr) return result;

  // Upstream gradients of the transformed heads and the entity table.
  RowMatrix<double> d_heads(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  auto& d_entities = grad->values(TableId::kEntity);
  const auto entities = internal::EntityMatrix(model);
  if (similarity) {
    const RowMatrix<Real> g = scores.cast<Real>();
    internal::ParallelFor(internal::NumBlocks(n, internal::kRowBlock), threads,
                          [&](std::size_t b) {
      const auto begin = static_cast<Eigen::Index>(b * internal::kRowBlock);
      const auto rows =
          static_cast<Eigen::Index>(std::min(n, (b + 1) * internal::kRowBlock)) - begin;
      d_heads.middleRows(begin, rows) =
          (g.middleRows(begin, rows) * entities).template cast<double>();
    });
    internal::ParallelFor(internal::NumBlocks(num_entities, internal::kEntityBlock), threads,
                          [&](std::size_t b) {
      const auto begin = static_cast<Eigen::Index>(b * internal::kEntityBlock);
      const auto rows = static_cast<Eigen::Index>(
                            std::min(num_entities, (b + 1) * internal::kEntityBlock)) - begin;
      const RowMatrix<Real> block = g.middleCols(begin, rows).transpose() * heads;
      for (Eigen::Index e = 0; e < rows; ++e) {
        auto dst = d_entities.row(static_cast<std::size_t>(begin + e));
        for (std::size_t k = 0; k < dim; ++k) dst[k] += static_cast<double>(block(e, k));
      }
    });
  } else {
    // Distance scorer: d(-|h - e|)/dh = -(h - e)/|h - e|. With w = g / |h - e|
    // the sums over candidates become dH = W E - diag(W 1) H and
    // dE = W^T H - diag(W^T 1) E.
    RowMatrix<Real> w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(num_entities));
    internal::ParallelFor(n, threads, [&](std::size_t i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t e = 0; e < num_entities; ++e) {
        const auto ee = static_cast<Eigen::Index>(e);
        // Zero subgradient at zero distance.
        w(ii, ee) = distances(ii, ee) > 0.0
                        ? static_cast<Real>(scores(ii, ee) / distances(ii, ee))
                        : Real(0);
      }
    });
    internal::ParallelFor(internal::NumBlocks(n, internal::kRowBlock), threads,
                          [&](std::size_t b) {
      const auto begin = static_cast<Eigen::Index>(b * internal::kRowBlock);
      const auto rows =
          static_cast<Eigen::Index>(std::min(n, (b + 1) * internal::kRowBlock)) - begin;
      const RowMatrix<Real> block = w.middleRows(begin, rows) * entities;
      for (Eigen::Index r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t e = 0; e < num_entities; ++e)
          total += static_cast<double>(w(begin + r, static_cast<Eigen::Index>(e)));
        for (std::size_t k = 0; k < dim; ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          d_heads(begin + r, kk) = static_cast<double>(block(r, kk)) -
                                   total * static_cast<double>(heads(begin + r, kk));
        }
      }
    });
    internal::ParallelFor(internal::NumBlocks(num_entities, internal::kEntityBlock), threads,
                          [&](std::size_t b) {
      const auto begin = static_cast<Eigen::Index>(b * internal::kEntityBlock);
      const auto rows = static_cast<Eigen::Index>(
                            std::min(num_entities, (b + 1) * internal::kEntityBlock)) - begin;
      const RowMatrix<Real> block = w.middleCols(begin, rows).transpose() * heads;
      const auto& table = model.table(TableId::kEntity);
      for (Eigen::Index e = 0; e < rows; ++e) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          total += static_cast<double>(w(static_cast<Eigen::Index>(i), begin + e));
        const auto id = static_cast<std::size_t>(begin + e);
        const auto src = table.row(id);
        auto dst = d_entities.row(id);
        for (std::size_t k = 0; k < dim; ++k)
          dst[k] += static_cast<double>(block(e, static_cast<Eigen::Index>(k))) -
                    total * static_cast<double>(src[k]);
      }
    });
  }
  for (std::size_t e = 0; e < num_entities; ++e) grad->MarkTouched(TableId::kEntity, e);

  // Per-example reverse pass, serial in batch order for a fixed reduction.
  const double reg_scale = lambda_u * inv_n;
  std::vector<double> d_rel_sum, d_entity;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = batch[i];
    const auto ii = static_cast<Eigen::Index>(i);
    CubeNormGrad<Real>(ws[i].relation_sum, reg_scale, d_rel_sum);
    model.Backward(ws[i], q.head, q.rel, q.time,
                   std::span<const double>(d_heads.row(ii).data(), dim), d_rel_sum, *grad);
    if (reg_scale != 0.0) {
      CubeNormGrad<Real>(model.table(TableId::kEntity).row(q.head), reg_scale, d_entity);
      grad->Add(TableId::kEntity, q.head, d_entity);
      CubeNormGrad<Real>(model.table(TableId::kEntity).row(q.tail), reg_scale, d_entity);
      grad->Add(TableId::kEntity, q.tail, d_entity);
    }
  }
  return result;
}

template <class Real>
double TemporalSmoothness(const Model<Real>& model, const SmoothMask& mask,
                          DenseGrad* grad, double weight) {
  const std::size_t num_times = model.shape().num_times;
  if (num_times < 2) throw TrainError("temporal smoothing needs at least two timestamps");
  const double inv = 1.0 / static_cast<double>(num_times - 1);
  double total = 0.0;
  const std::pair<TableId, bool> tables[] = {{TableId::kTimeTranslate, mask.translate},
                                             {TableId::kTimeScale, mask.scale},
                                             {TableId::kTimeRotate, mask.rotate}};
  std::vector<double> diff, g;
  for (const auto& [id, enabled] : tables) {
    if (!enabled || !model.UsesTable(id)) continue;
    const auto& t = model.table(id);
    diff.resize(t.cols());
    for (std::size_t i = 0; i + 1 < num_times; ++i) {
      const auto a = t.row(i);
      const auto b = t.row(i + 1);
      for (std::size_t k = 0; k < t.cols(); ++k)
        diff[k] = static_cast<double>(b[k]) - static_cast<double>(a[k]);
      total += CubeNorm<double>(diff);
      if (grad != nullptr) {
        CubeNormGrad<double>(diff, weight * inv, g);
        grad->Add(id, i + 1, g);
        for (auto& v : g) v = -v;
        grad->Add(id, i, g);
      }
    }
  }
  return total * inv;
}

template <class Real>
void AdagradStep(Model<Real>& model, AdagradState<Real>& state, const DenseGrad& grad,
                 double learning_rate) {
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    for (std::size_t row : grad.touched_rows(id)) {
      for (double g : grad.values(id).row(row)) {
        if (!std::isfinite(g))
          throw TrainError(std::string("non-finite gradient in table ") + TableName(id) +
                           " row " + std::to_string(row));
      }
    }
  }
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    auto& params = model.table(id);
    auto& acc = state.accumulators[t];
    for (std::size_t row : grad.touched_rows(id)) {
      const auto g = grad.values(id).row(row);
      auto p = params.row(row);
      auto a = acc.row(row);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double sum = static_cast<double>(a[k]) + g[k] * g[k];
        a[k] = static_cast<Real>(sum);
        p[k] = static_cast<Real>(static_cast<double>(p[k]) -
                                 learning_rate * g[k] / (std::sqrt(sum) + state.epsilon));
      }
    }
  }
}

std::string FormatEpochRecord(const EpochRecord& r) {
  char buf[256];
  int n = std::snprintf(buf, sizeof buf,
                        "epoch=%zu loss=%.10g cross_entropy=%.10g n3=%.10g temporal=%.10g "
                        "seconds=%.3f",
                        r.epoch, r.loss, r.cross_entropy, r.n3, r.temporal, r.seconds);
  std::string s(buf, static_cast<std::size_t>(n));
  if (r.valid_mrr) {
    std::snprintf(buf, sizeof buf, " valid_mrr=%.6f", *r.valid_mrr);
    s += buf;
  }
  return s;
}

template <class Real>
Model<Real> MakeModel(const TrainConfig& config, const Dataset& dataset) {
  ModelShape shape{config.dim, dataset.vocab.num_entities(), dataset.vocab.num_relations(),
                   dataset.vocab.num_times()};
  Model<Real> model(shape, {config.variant, config.fusion, config.score});
  model.InitGaussian(config.seed, config.init_scale, config.init_scale_at_identity);
  return model;
}

template <class Real>
TrainReport TrainLoop(const TrainConfig& config, const Dataset& dataset, Model<Real>& model,
                      AdagradState<Real>& state, const TrainHooks& hooks) {
  if (config.batch_size == 0 || config.max_epochs == 0 || !(config.learning_rate > 0))
    throw std::invalid_argument("batch size, epochs and learning rate must be positive");
  if (dataset.train.empty()) throw TrainError("training split is empty");

  const std::size_t threads = ResolveThreads(config.threads);
  const std::vector<Quadruple> examples =
      AugmentReciprocal(dataset.train, dataset.vocab.num_relations());
  const bool validate = !dataset.valid.empty() && config.eval_every > 0;
  FilterIndex filter;
  if (validate) filter = BuildDatasetFilter(dataset);

  const SmoothMask mask{config.smooth_translate, config.smooth_scale, config.smooth_rotate};
  DenseGrad grad(model);
  std::vector<std::size_t> order(examples.size());
  std::vector<Quadruple> batch;

  TrainReport report;
  std::optional<Model<Real>> best_model;
  std::optional<AdagradState<Real>> best_state;
  std::size_t evals_without_improvement = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(examples[order[i]]);

      grad.Reset();
      const BatchLoss bl = ComputeBatchLoss(model, batch, config.lambda_u, &grad, threads);
      double temporal = 0.0;
      if (config.lambda_tau != 0.0)
        temporal = TemporalSmoothness(model, mask, &grad, config.lambda_tau);
      AdagradStep(model, state, grad, config.learning_rate);

      const double w = static_cast<double>(batch.size());
      record.loss += w * (bl.loss + config.lambda_tau * temporal);
      record.cross_entropy += w * bl.cross_entropy;
      record.n3 += w * bl.n3;
      record.temporal += w * temporal;
    }
    const double inv = 1.0 / static_cast<double>(examples.size());
    record.loss *= inv;
    record.cross_entropy *= inv;
    record.n3 *= inv;
    record.temporal *= inv;

    if (validate && epoch % config.eval_every == 0) {
      const double mrr = Evaluate(model, dataset.valid, filter, threads).both.mrr;
      record.valid_mrr = mrr;
      if (!report.best_valid_mrr || mrr > *report.best_valid_mrr) {
        report.best_valid_mrr = mrr;
        report.best_epoch = epoch;
        best_model = model;
        best_state = state;
        evals_without_improvement = 0;
        if (hooks.on_improvement) hooks.on_improvement(epoch);
      } else {
        ++evals_without_improvement;
      }
    }
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
    if (config.patience > 0 && evals_without_improvement >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }
  if (best_model) {
    model = std::move(*best_model);
    state = std::move(*best_state);
  } else {
    report.best_epoch = report.epochs.size();
  }
  return report;
}

#define TCE_INSTANTIATE(Real)                                                                 \
  template BatchLoss ComputeBatchLoss<Real>(const Model<Real>&, std::span<const Quadruple>,  \
                                            double, DenseGrad*, std::size_t);                \
  template double TemporalSmoothness<Real>(const Model<Real>&, const SmoothMask&, DenseGrad*, \
                                           double);                                          \
  template void AdagradStep<Real>(Model<Real>&, AdagradState<Real>&, const DenseGrad&,       \
                                  double);                                                   \
  template Model<Real> MakeModel<Real>(const TrainConfig&, const Dataset&);                  \
  template TrainReport TrainLoop<Real>(const TrainConfig&, const Dataset&, Model<Real>&,     \
                                       AdagradState<Real>&, const TrainHooks&);
TCE_INSTANTIATE(float)
TCE_INSTANTIATE(double)
#undef TCE_INSTANTIATE

}  // namespace tce
