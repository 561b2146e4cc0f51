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

#include "tce/model.h"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tce {

const char* ToString(ScoreKind kind) {
  return kind == ScoreKind::kSimilarity ? "similarity" : "distance";
}

ScoreKind ParseScoreKind(const std::string& name) {
  if (name == "similarity") return ScoreKind::kSimilarity;
  if (name == "distance") return ScoreKind::kDistance;
  throw std::invalid_argument("unknown scorer '" + name + "'");
}

const char* TableName(TableId id) {
  switch (id) {
    case TableId::kEntity: return "entity";
    case TableId::kRelTranslate: return "rel_translate";
    case TableId::kRelScale: return "rel_scale";
    case TableId::kRelRotate: return "rel_rotate";
    case TableId::kTimeTranslate: return "time_translate";
    case TableId::kTimeScale: return "time_scale";
    case TableId::kTimeRotate: return "time_rotate";
  }
  return "?";
}

TableId TableFor(OpKind kind, ParamSource source) {
  const bool rel = source == ParamSource::kRelation;
  switch (kind) {
    case OpKind::kTranslate: return rel ? TableId::kRelTranslate : TableId::kTimeTranslate;
    case OpKind::kScale: return rel ? TableId::kRelScale : TableId::kTimeScale;
    case OpKind::kRotate: return rel ? TableId::kRelRotate : TableId::kTimeRotate;
  }
  throw std::logic_error("bad op kind");
}

namespace {

constexpr OpAtom kRelT{OpKind::kTranslate, ParamSource::kRelation};
constexpr OpAtom kRelS{OpKind::kScale, ParamSource::kRelation};
constexpr OpAtom kRelR{OpKind::kRotate, ParamSource::kRelation};
constexpr OpAtom kTimeT{OpKind::kTranslate, ParamSource::kTime};
constexpr OpAtom kTimeS{OpKind::kScale, ParamSource::kTime};
constexpr OpAtom kTimeR{OpKind::kRotate, ParamSource::kTime};

VariantSpec Make(std::string name, std::vector<OpAtom> head,
                 std::size_t carrier, std::vector<OpAtom> time) {
  VariantSpec v{std::move(name), {std::move(head), std::move(time), carrier}};
  v.pipeline.Validate();
  return v;
}

std::vector<VariantSpec> BuildRegistry() {
  // Head atoms in application order: e' = R . S . T . e applies T first.
  // Time atoms in application order: S_t . T_t . X applies T_t first.
  return {
      Make("TCompoundE", {kRelT, kRelS}, 1, {kTimeT, kTimeS}),
      // Relation-side variants; the time side stays S_t . T_t.
      Make("V1", {kRelT}, 0, {kTimeT, kTimeS}),
      Make("V2", {kRelT, kRelS}, 0, {kTimeT, kTimeS}),
      Make("V3", {kRelT, kRelS, kRelR}, 0, {kTimeT, kTimeS}),
      Make("V4", {kRelS}, 0, {kTimeT, kTimeS}),
      Make("V5", {kRelT, kRelS, kRelR}, 1, {kTimeT, kTimeS}),
      Make("V6", {kRelR}, 0, {kTimeT, kTimeS}),
      Make("V7", {kRelT, kRelS, kRelR}, 2, {kTimeT, kTimeS}),
      // Time-side variants; the relation side stays S_r . T_r.
      Make("V8", {kRelT, kRelS}, 0, {kTimeT}),
      Make("V9", {kRelT, kRelS}, 0, {kTimeS}),
      Make("V10", {kRelT, kRelS}, 0, {kTimeR}),
      Make("V11", {kRelT, kRelS}, 0, {kTimeT, kTimeS, kTimeR}),
      Make("V12", {kRelT, kRelS}, 1, {kTimeT}),
      Make("V13", {kRelT, kRelS}, 1, {kTimeS}),
      Make("V14", {kRelT, kRelS}, 1, {kTimeR}),
      Make("V15", {kRelT, kRelS}, 1, {kTimeT, kTimeS, kTimeR}),
  };
}

}  // namespace

const std::vector<VariantSpec>& VariantRegistry() {
  static const std::vector<VariantSpec> registry = BuildRegistry();
  return registry;
}

const VariantSpec& FindVariant(const std::string& name) {
  for (const auto& v : VariantRegistry())
    if (v.name == name) return v;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

void AccumulateRow(SparseGrad& grad, TableId table, Id row,
                   std::span<const double> values, double scale) {
  auto& dst = grad[{table, row}];
  if (dst.empty()) dst.assign(values.size(), 0.0);
  if (dst.size() != values.size()) throw std::logic_error("gradient width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) dst[i] += scale * values[i];
}

template <class Real>
Model<Real>::Model(const ModelShape& shape, const ModelOptions& options)
    : shape_(shape), options_(options), variant_(&FindVariant(options.variant)) {
  if (shape.dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  const auto& p = variant_->pipeline;
  steps_ = LowerPipeline(p, options.fusion);

  widths_[Index(TableId::kEntity)] = shape.dim;
  for (std::size_t i = 0; i < p.head_atoms.size(); ++i) {
    auto& w = widths_[Index(TableFor(p.head_atoms[i].kind, ParamSource::kRelation))];
    if (w != 0) throw GeometryError("variant repeats a relation atom kind");
    w = p.RelationWidth(i, shape.dim);
  }
  for (std::size_t j = 0; j < p.time_atoms.size(); ++j) {
    auto& w = widths_[Index(TableFor(p.time_atoms[j].kind, ParamSource::kTime))];
    if (w != 0) throw GeometryError("variant repeats a time atom kind");
    w = p.TimeWidth(j, shape.dim, options.fusion);
  }
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    if (widths_[t] != 0) tables_[t] = EmbeddingTable<Real>(TableRows(id), widths_[t]);
  }
}

template <class Real>
std::size_t Model<Real>::TableRows(TableId id) const {
  switch (id) {
    case TableId::kEntity: return shape_.num_entities;
    case TableId::kRelTranslate:
    case TableId::kRelScale:
    case TableId::kRelRotate: return shape_.augmented_relations();
    default: return shape_.num_times;
  }
}

template <class Real>
void Model<Real>::InitGaussian(std::uint64_t seed, double init_scale,
                               bool scale_at_identity) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_scale);
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    const bool is_scale = id == TableId::kRelScale || id == TableId::kTimeScale;
    const double offset = (scale_at_identity && is_scale) ? 1.0 : 0.0;
    for (auto& v : tables_[t].data()) v = static_cast<Real>(offset + normal(rng));
  }
}

template <class Real>
void Model<Real>::SetIdentityOperators() {
  for (std::size_t t = 1; t < kNumTables; ++t) {
    const auto id = static_cast<TableId>(t);
    const bool is_scale = id == TableId::kRelScale || id == TableId::kTimeScale;
    for (auto& v : tables_[t].data()) v = is_scale ? Real(1) : Real(0);
  }
}

template <class Real>
void Model<Real>::CheckQuery(Id head, Id rel, Id time) const {
  if (head >= shape_.num_entities) throw IdError("entity id out of range");
  if (rel >= shape_.augmented_relations()) throw IdError("relation id out of range");
  if (time >= shape_.num_times) throw IdError("timestamp id out of range");
}

template <class Real>
void Model<Real>::CheckQuadruple(const Quadruple& q) const {
  CheckQuery(q.head, q.rel, q.time);
  if (q.tail >= shape_.num_entities) throw IdError("entity id out of range");
}

template <class Real>
std::span<const Real> Model<Real>::StepParams(const LoweredStep& step,
                                              const Workspace& ws,
                                              Id time) const {
  if (step.source == ParamSource::kRelation) return ws.fused[step.atom];
  const auto kind = variant_->pipeline.time_atoms[step.atom].kind;
  return tables_[Index(TableFor(kind, ParamSource::kTime))].row(time);
}

template <class Real>
void Model<Real>::Transform(std::span<const Real> x, Id rel, Id time,
                            Workspace& ws) const {
  const auto& p = variant_->pipeline;
  if (x.size() != shape_.dim) throw GeometryError("head vector has wrong dimension");
  ws.fused.resize(p.head_atoms.size());
  for (std::size_t i = 0; i < p.head_atoms.size(); ++i) {
    const auto row = tables_[Index(TableFor(p.head_atoms[i].kind, ParamSource::kRelation))].row(rel);
    ws.fused[i].assign(row.begin(), row.end());
  }
  ws.carrier_trace.resize(p.time_atoms.size());
  if (options_.fusion == Fusion::kVector && !p.time_atoms.empty()) {
    const std::size_t c = *p.carrier;
    const OpKind carrier_kind = p.head_atoms[c].kind;
    for (std::size_t j = 0; j < p.time_atoms.size(); ++j) {
      ws.carrier_trace[j] = ws.fused[c];
      const auto kind = p.time_atoms[j].kind;
      ApplyTimeAtomToCarrier<Real>(
          carrier_kind, kind,
          tables_[Index(TableFor(kind, ParamSource::kTime))].row(time),
          ws.fused[c]);
    }
  }

  ws.inputs.resize(steps_.size());
  ws.head.assign(x.begin(), x.end());
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    ws.inputs[k] = ws.head;
    ApplyAtomInPlace<Real>(steps_[k].kind, StepParams(steps_[k], ws, time), ws.head);
  }

  ws.relation_sum.assign(shape_.dim, Real(0));
  for (std::size_t i = 0; i < p.head_atoms.size(); ++i) {
    if (p.head_atoms[i].kind == OpKind::kRotate) continue;
    for (std::size_t k = 0; k < shape_.dim; ++k) ws.relation_sum[k] += ws.fused[i][k];
  }
}

namespace {

// Reverse of an in-place atom: `in` entered, `out` left, `g` is d/d(out) on
// entry and d/d(in) on exit; `dp` accumulates d/d(params).
template <class Real>
void AtomBackward(OpKind kind, std::span<const Real> params,
                  std::span<const Real> in, std::span<const Real> out,
                  std::vector<double>& g, std::vector<double>& dp) {
  switch (kind) {
    case OpKind::kTranslate:
      for (std::size_t i = 0; i < g.size(); ++i) dp[i] += g[i];
      break;
    case OpKind::kScale:
      for (std::size_t i = 0; i < g.size(); ++i) {
        dp[i] += static_cast<double>(in[i]) * g[i];
        g[i] *= static_cast<double>(params[i]);
      }
      break;
    case OpKind::kRotate:
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double c = std::cos(static_cast<double>(params[i]));
        const double s = std::sin(static_cast<double>(params[i]));
        const double g0 = g[2 * i];
        const double g1 = g[2 * i + 1];
        dp[i] += -g0 * static_cast<double>(out[2 * i + 1]) +
                 g1 * static_cast<double>(out[2 * i]);
        g[2 * i] = c * g0 + s * g1;
        g[2 * i + 1] = -s * g0 + c * g1;
      }
      break;
  }
}

}  // namespace

template <class Real>
void Model<Real>::Backward(const Workspace& ws, Id head, Id rel, Id time,
                           std::span<const double> d_head,
                           std::span<const double> d_relation_sum,
                           GradSink& sink) const {
  const auto& p = variant_->pipeline;
  std::vector<std::vector<double>> d_fused(p.head_atoms.size());
  for (std::size_t i = 0; i < d_fused.size(); ++i) d_fused[i].assign(ws.fused[i].size(), 0.0);
  std::vector<std::vector<double>> d_time(p.time_atoms.size());
  for (std::size_t j = 0; j < d_time.size(); ++j)
    d_time[j].assign(widths_[Index(TableFor(p.time_atoms[j].kind, ParamSource::kTime))], 0.0);

  if (!d_head.empty()) {
    std::vector<double> g(d_head.begin(), d_head.end());
    for (std::size_t k = steps_.size(); k-- > 0;) {
      const auto& step = steps_[k];
      const std::span<const Real> out =
          k + 1 < steps_.size() ? std::span<const Real>(ws.inputs[k + 1])
                                : std::span<const Real>(ws.head);
      auto& dp = step.source == ParamSource::kRelation ? d_fused[step.atom]
                                                       : d_time[step.atom];
      AtomBackward<Real>(step.kind, StepParams(step, ws, time), ws.inputs[k], out, g, dp);
    }
    sink.Add(TableId::kEntity, head, g);
  }

  if (!d_relation_sum.empty()) {
    for (std::size_t i = 0; i < p.head_atoms.size(); ++i) {
      if (p.head_atoms[i].kind == OpKind::kRotate) continue;
      for (std::size_t k = 0; k < shape_.dim; ++k) d_fused[i][k] += d_relation_sum[k];
    }
  }

  if (options_.fusion == Fusion::kVector && !p.time_atoms.empty()) {
    const std::size_t c = *p.carrier;
    const bool angles = p.head_atoms[c].kind == OpKind::kRotate;
    auto& g = d_fused[c];
    for (std::size_t j = p.time_atoms.size(); j-- > 0;) {
      OpKind kind = p.time_atoms[j].kind;
      const auto params = tables_[Index(TableFor(kind, ParamSource::kTime))].row(time);
      if (angles && kind == OpKind::kRotate) kind = OpKind::kTranslate;
      const std::span<const Real> out =
          j + 1 < p.time_atoms.size() ? std::span<const Real>(ws.carrier_trace[j + 1])
                                      : std::span<const Real>(ws.fused[c]);
      AtomBackward<Real>(kind, params, ws.carrier_trace[j], out, g, d_time[j]);
    }
  }

  for (std::size_t i = 0; i < p.head_atoms.size(); ++i)
    sink.Add(TableFor(p.head_atoms[i].kind, ParamSource::kRelation), rel, d_fused[i]);
  for (std::size_t j = 0; j < p.time_atoms.size(); ++j)
    sink.Add(TableFor(p.time_atoms[j].kind, ParamSource::kTime), time, d_time[j]);
}

template <class Real>
double Model<Real>::ScoreTransformed(std::span<const Real> transformed,
                                     Id tail) const {
  const auto e = tables_[0].row(tail);
  double acc = 0.0;
  if (options_.score == ScoreKind::kSimilarity) {
    for (std::size_t k = 0; k < e.size(); ++k)
      acc += static_cast<double>(transformed[k]) * static_cast<double>(e[k]);
    return acc;
  }
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double diff = static_cast<double>(transformed[k]) - static_cast<double>(e[k]);
    acc += diff * diff;
  }
  return -std::sqrt(acc);
}

template <class Real>
void Model<Real>::ScoreTransformedGradient(std::span<const Real> transformed,
                                           Id tail, std::span<double> d_head,
                                           std::span<double> d_tail) const {
  const auto e = tables_[0].row(tail);
  if (options_.score == ScoreKind::kSimilarity) {
    for (std::size_t k = 0; k < e.size(); ++k) {
      d_head[k] = static_cast<double>(e[k]);
      d_tail[k] = static_cast<double>(transformed[k]);
    }
    return;
  }
  const double dist = -ScoreTransformed(transformed, tail);
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double diff = static_cast<double>(transformed[k]) - static_cast<double>(e[k]);
    // The norm is not differentiable at zero distance; use the zero subgradient.
    const double g = dist > 0.0 ? diff / dist : 0.0;
    d_head[k] = -g;
    d_tail[k] = g;
  }
}

template <class Real>
double Model<Real>::Score(const Quadruple& q) const {
  CheckQuadruple(q);
  Workspace ws;
  TransformHead(q.head, q.rel, q.time, ws);
  return ScoreTransformed(ws.head, q.tail);
}

template <class Real>
std::vector<double> Model<Real>::ScoreAllTails(Id head, Id rel, Id time) const {
  CheckQuery(head, rel, time);
  Workspace ws;
  TransformHead(head, rel, time, ws);
  std::vector<double> out(shape_.num_entities);
  ScoreAllTails(ws.head, out);
  return out;
}

template <class Real>
void Model<Real>::ScoreAllTails(std::span<const Real> transformed,
                                std::span<double> out) const {
  for (std::size_t e = 0; e < shape_.num_entities; ++e)
    out[e] = ScoreTransformed(transformed, static_cast<Id>(e));
}

template <class Real>
SparseGrad Model<Real>::ScoreGradients(const Quadruple& q, double upstream) const {
  if (options_.variant != "TCompoundE" || options_.fusion != Fusion::kVector ||
      options_.score != ScoreKind::kSimilarity) {
    throw std::invalid_argument(
        "closed-form gradients need TCompoundE with vector fusion and the similarity scorer");
  }
  CheckQuadruple(q);
  const std::size_t d = shape_.dim;
  const auto es = table(TableId::kEntity).row(q.head);
  const auto eo = table(TableId::kEntity).row(q.tail);
  const auto tr = table(TableId::kRelTranslate).row(q.rel);
  const auto sr = table(TableId::kRelScale).row(q.rel);
  const auto tt = table(TableId::kTimeTranslate).row(q.time);
  const auto st = table(TableId::kTimeScale).row(q.time);

  std::vector<double> d_eo(d), d_es(d), d_sr(d), d_st(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double shifted = double(es[k]) + double(tr[k]);       // e_s + t_r
    const double carrier = double(sr[k]) + double(tt[k]);       // s_r + t_tau
    const double fused = double(st[k]) * carrier;               // s_{r,tau}
    d_eo[k] = upstream * fused * shifted;
    d_es[k] = upstream * fused * double(eo[k]);
    d_sr[k] = upstream * double(st[k]) * shifted * double(eo[k]);
    d_st[k] = upstream * carrier * shifted * double(eo[k]);
  }
  SparseGrad grad;
  AccumulateRow(grad, TableId::kEntity, q.tail, d_eo);
  AccumulateRow(grad, TableId::kEntity, q.head, d_es);
  AccumulateRow(grad, TableId::kRelTranslate, q.rel, d_es);
  AccumulateRow(grad, TableId::kRelScale, q.rel, d_sr);
  AccumulateRow(grad, TableId::kTimeTranslate, q.time, d_sr);
  AccumulateRow(grad, TableId::kTimeScale, q.time, d_st);
  return grad;
}

template <class Real>
SparseGrad Model<Real>::ScoreGradientsGeneric(const Quadruple& q,
                                              double upstream) const {
  CheckQuadruple(q);
  Workspace ws;
  TransformHead(q.head, q.rel, q.time, ws);
  std::vector<double> d_head(shape_.dim), d_tail(shape_.dim);
  ScoreTransformedGradient(ws.head, q.tail, d_head, d_tail);
  for (auto& v : d_head) v *= upstream;
  SparseGrad grad;
  SparseGradSink sink(grad);
  Backward(ws, q.head, q.rel, q.time, d_head, {}, sink);
  AccumulateRow(grad, TableId::kEntity, q.tail, d_tail, upstream);
  return grad;
}

template <class Real>
std::vector<std::vector<Real>> Model<Real>::Stages(Id head, Id rel, Id time) const {
  CheckQuery(head, rel, time);
  Workspace ws;
  TransformHead(head, rel, time, ws);
  std::vector<std::vector<Real>> stages = ws.inputs;
  stages.push_back(ws.head);
  return stages;
}

template class Model<float>;
template class Model<double>;

}  // namespace tce
