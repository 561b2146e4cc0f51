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

#include "tce/geometry.h"

namespace tce {

const char* ToString(OpKind kind) {
  switch (kind) {
    case OpKind::kTranslate: return "translate";
    case OpKind::kScale: return "scale";
    case OpKind::kRotate: return "rotate";
  }
  return "?";
}

const char* ToString(Fusion fusion) {
  return fusion == Fusion::kVector ? "vector" : "matrix";
}

Fusion ParseFusion(const std::string& name) {
  if (name == "vector") return Fusion::kVector;
  if (name == "matrix") return Fusion::kMatrix;
  throw std::invalid_argument("unknown fusion mode '" + name + "'");
}

std::size_t ParamWidth(OpKind kind, std::size_t width) {
  if (kind != OpKind::kRotate) return width;
  if (width % 2 != 0) throw GeometryError("rotate atom requires an even width");
  return width / 2;
}

void OperatorPipeline::Validate() const {
  if (head_atoms.empty()) throw GeometryError("pipeline has no head atoms");
  for (const auto& a : head_atoms) {
    if (a.source != ParamSource::kRelation)
      throw GeometryError("head atoms must be relation-sourced");
  }
  for (const auto& a : time_atoms) {
    if (a.source != ParamSource::kTime)
      throw GeometryError("time atoms must be time-sourced");
  }
  if (carrier && *carrier >= head_atoms.size())
    throw GeometryError("carrier index out of range");
  if (!carrier && !time_atoms.empty())
    throw GeometryError("time atoms present but no carrier designated");
}

std::size_t OperatorPipeline::RelationWidth(std::size_t i,
                                            std::size_t dim) const {
  return ParamWidth(head_atoms.at(i).kind, dim);
}

std::size_t OperatorPipeline::TimeWidth(std::size_t j, std::size_t dim,
                                        Fusion fusion) const {
  const OpKind kind = time_atoms.at(j).kind;
  if (fusion == Fusion::kMatrix || !carrier) return ParamWidth(kind, dim);
  const std::size_t carrier_width = RelationWidth(*carrier, dim);
  if (head_atoms[*carrier].kind == OpKind::kRotate) {
    // Angle arithmetic: every time atom is as wide as the angle vector.
    return carrier_width;
  }
  return ParamWidth(kind, carrier_width);
}

std::vector<LoweredStep> LowerPipeline(const OperatorPipeline& pipeline,
                                       Fusion fusion) {
  pipeline.Validate();
  std::vector<LoweredStep> steps;
  for (std::size_t i = 0; i < pipeline.head_atoms.size(); ++i) {
    steps.push_back({pipeline.head_atoms[i].kind, ParamSource::kRelation, i});
    if (fusion == Fusion::kMatrix && pipeline.carrier && *pipeline.carrier == i) {
      for (std::size_t j = 0; j < pipeline.time_atoms.size(); ++j)
        steps.push_back({pipeline.time_atoms[j].kind, ParamSource::kTime, j});
    }
  }
  return steps;
}

namespace {

void CheckRowCounts(const OperatorPipeline& pipeline, const ParamRows& rel,
                    const ParamRows& time) {
  if (rel.size() != pipeline.head_atoms.size())
    throw GeometryError("one relation row per head atom required");
  if (time.size() != pipeline.time_atoms.size())
    throw GeometryError("one time row per time atom required");
}

}  // namespace

ParamRows ApplyTimeFusion(const OperatorPipeline& pipeline,
                          const ParamRows& rel, const ParamRows& time) {
  pipeline.Validate();
  CheckRowCounts(pipeline, rel, time);
  ParamRows fused = rel;
  if (pipeline.time_atoms.empty()) return fused;
  const std::size_t c = *pipeline.carrier;
  const OpKind carrier_kind = pipeline.head_atoms[c].kind;
  for (std::size_t j = 0; j < time.size(); ++j) {
    ApplyTimeAtomToCarrier<double>(carrier_kind, pipeline.time_atoms[j].kind,
                                   time[j], fused[c]);
  }
  return fused;
}

std::vector<double> ApplyPipeline(const OperatorPipeline& pipeline,
                                  const ParamRows& fused,
                                  std::span<const double> head) {
  pipeline.Validate();
  if (fused.size() != pipeline.head_atoms.size())
    throw GeometryError("one fused row per head atom required");
  std::vector<double> x(head.begin(), head.end());
  for (std::size_t i = 0; i < fused.size(); ++i)
    ApplyAtomInPlace<double>(pipeline.head_atoms[i].kind, fused[i], x);
  return x;
}

std::vector<double> ApplyPipelineMatrixFusion(const OperatorPipeline& pipeline,
                                              const ParamRows& rel,
                                              const ParamRows& time,
                                              std::span<const double> head) {
  CheckRowCounts(pipeline, rel, time);
  std::vector<double> x(head.begin(), head.end());
  for (const auto& step : LowerPipeline(pipeline, Fusion::kMatrix)) {
    const auto& row = step.source == ParamSource::kRelation ? rel[step.atom]
                                                            : time[step.atom];
    ApplyAtomInPlace<double>(step.kind, row, x);
  }
  return x;
}

AffineMap AffineMap::Identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
}

Eigen::VectorXd AffineMap::Apply(const Eigen::VectorXd& x) const {
  return linear * x + offset;
}

AffineMap Compose(const AffineMap& after, const AffineMap& before) {
  if (after.dim() != before.dim()) throw GeometryError("compose: dimension mismatch");
  return {after.linear * before.linear, after.linear * before.offset + after.offset};
}

AffineMap AtomAffine(OpKind kind, std::span<const double> params,
                     std::size_t dim) {
  if (params.size() != ParamWidth(kind, dim))
    throw GeometryError("affine atom: dimension mismatch");
  AffineMap map = AffineMap::Identity(dim);
  switch (kind) {
    case OpKind::kTranslate:
      for (std::size_t i = 0; i < dim; ++i) map.offset(i) = params[i];
      break;
    case OpKind::kScale:
      for (std::size_t i = 0; i < dim; ++i) map.linear(i, i) = params[i];
      break;
    case OpKind::kRotate:
      for (std::size_t i = 0; i < params.size(); ++i) {
        const auto a = static_cast<Eigen::Index>(2 * i);
        map.linear(a, a) = std::cos(params[i]);
        map.linear(a, a + 1) = -std::sin(params[i]);
        map.linear(a + 1, a) = std::sin(params[i]);
        map.linear(a + 1, a + 1) = std::cos(params[i]);
      }
      break;
  }
  return map;
}

AffineMap AffineOracle(const OperatorPipeline& pipeline,
                       const ParamRows& fused, std::size_t dim) {
  pipeline.Validate();
  if (fused.size() != pipeline.head_atoms.size())
    throw GeometryError("one fused row per head atom required");
  AffineMap map = AffineMap::Identity(dim);
  for (std::size_t i = 0; i < fused.size(); ++i)
    map = Compose(AtomAffine(pipeline.head_atoms[i].kind, fused[i], dim), map);
  return map;
}

ParamRows OracleFuse(const OperatorPipeline& pipeline, const ParamRows& rel,
                     const ParamRows& time) {
  pipeline.Validate();
  CheckRowCounts(pipeline, rel, time);
  ParamRows fused = rel;
  if (pipeline.time_atoms.empty()) return fused;
  const std::size_t c = *pipeline.carrier;
  const bool angles = pipeline.head_atoms[c].kind == OpKind::kRotate;
  const std::size_t width = rel[c].size();
  AffineMap map = AffineMap::Identity(width);
  for (std::size_t j = 0; j < time.size(); ++j) {
    OpKind kind = pipeline.time_atoms[j].kind;
    // Rotating an angle vector is adding angles.
    if (angles && kind == OpKind::kRotate) kind = OpKind::kTranslate;
    map = Compose(AtomAffine(kind, time[j], width), map);
  }
  const Eigen::VectorXd point =
      Eigen::Map<const Eigen::VectorXd>(rel[c].data(), static_cast<Eigen::Index>(width));
  const Eigen::VectorXd out = map.Apply(point);
  fused[c].assign(out.data(), out.data() + out.size());
  return fused;
}

AffineMap AffineOracleMatrixFusion(const OperatorPipeline& pipeline,
                                   const ParamRows& rel, const ParamRows& time,
                                   std::size_t dim) {
  CheckRowCounts(pipeline, rel, time);
  AffineMap map = AffineMap::Identity(dim);
  for (const auto& step : LowerPipeline(pipeline, Fusion::kMatrix)) {
    const auto& row = step.source == ParamSource::kRelation ? rel[step.atom]
                                                            : time[step.atom];
    map = Compose(AtomAffine(step.kind, row, dim), map);
  }
  return map;
}

}  // namespace tce
