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

#ifndef TCE_GEOMETRY_H_
#define TCE_GEOMETRY_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tce {

// Compound geometric operators acting on d-dimensional vectors.
//
// An operator pipeline is an ordered list of atoms (translate, scale,
// rotate). Relation-sourced atoms act on the head entity; time-sourced atoms
// act on the parameter vector of one relation atom (the carrier) before it is
// applied. Rotations act on consecutive coordinate pairs with one angle per
// pair, so a rotate parameter row is half as wide as the vector it rotates.

enum class OpKind : std::uint8_t { kTranslate, kScale, kRotate };
enum class ParamSource : std::uint8_t { kRelation, kTime };

// How time atoms combine with the carrier.
//   kVector: time atoms transform the carrier's parameter vector.
//   kMatrix: time atoms are spliced into the head pipeline after the carrier.
enum class Fusion : std::uint8_t { kVector, kMatrix };

const char* ToString(OpKind kind);
const char* ToString(Fusion fusion);
Fusion ParseFusion(const std::string& name);

struct OpAtom {
  OpKind kind = OpKind::kTranslate;
  ParamSource source = ParamSource::kRelation;

  friend bool operator==(const OpAtom&, const OpAtom&) = default;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Width of a parameter row for an atom of `kind` acting on vectors of width
// `width`. Throws for rotations of odd width.
std::size_t ParamWidth(OpKind kind, std::size_t width);

struct OperatorPipeline {
  std::vector<OpAtom> head_atoms;  // application order, first applied first
  std::vector<OpAtom> time_atoms;  // application order on the carrier
  std::optional<std::size_t> carrier;

  // Throws GeometryError when head_atoms is empty, a head atom is not
  // relation-sourced, a time atom is not time-sourced, the carrier index is
  // out of range, or time atoms are present without a carrier.
  void Validate() const;

  // Parameter width of head atom `i` at embedding dimension `dim`.
  std::size_t RelationWidth(std::size_t i, std::size_t dim) const;
  // Parameter width of time atom `j` under the given fusion mode.
  std::size_t TimeWidth(std::size_t j, std::size_t dim, Fusion fusion) const;
};

// One step of the head transform after lowering a pipeline for a fusion mode.
struct LoweredStep {
  OpKind kind;
  ParamSource source;
  std::size_t atom;  // index into head_atoms or time_atoms
};

std::vector<LoweredStep> LowerPipeline(const OperatorPipeline& pipeline,
                                       Fusion fusion);

// ---------------------------------------------------------------------------
// Vectorized kernels. All operate in place on `x`.

template <class Real>
void ApplyAtomInPlace(OpKind kind, std::span<const Real> params,
                      std::span<Real> x) {
  switch (kind) {
    case OpKind::kTranslate:
      if (params.size() != x.size()) throw GeometryError("translate: dimension mismatch");
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += params[i];
      return;
    case OpKind::kScale:
      if (params.size() != x.size()) throw GeometryError("scale: dimension mismatch");
      for (std::size_t i = 0; i < x.size(); ++i) x[i] *= params[i];
      return;
    case OpKind::kRotate:
      if (x.size() % 2 != 0) throw GeometryError("rotate: odd dimension");
      if (2 * params.size() != x.size()) throw GeometryError("rotate: dimension mismatch");
      for (std::size_t i = 0; i < params.size(); ++i) {
        const Real c = std::cos(params[i]);
        const Real s = std::sin(params[i]);
        const Real a = x[2 * i];
        const Real b = x[2 * i + 1];
        x[2 * i] = a * c - b * s;
        x[2 * i + 1] = a * s + b * c;
      }
      return;
  }
}

// Applies a time atom to a carrier parameter vector. For a rotate carrier the
// vector holds angles: translate adds, scale multiplies, rotate adds angles.
template <class Real>
void ApplyTimeAtomToCarrier(OpKind carrier_kind, OpKind time_kind,
                            std::span<const Real> params,
                            std::span<Real> carrier) {
  if (carrier_kind == OpKind::kRotate && time_kind == OpKind::kRotate) {
    ApplyAtomInPlace<Real>(OpKind::kTranslate, params, carrier);
    return;
  }
  ApplyAtomInPlace<Real>(time_kind, params, carrier);
}

template <class Real>
std::vector<Real> ApplyAtom(OpKind kind, std::span<const Real> params,
                            std::span<const Real> x) {
  std::vector<Real> out(x.begin(), x.end());
  ApplyAtomInPlace<Real>(kind, params, std::span<Real>(out));
  return out;
}

using ParamRows = std::vector<std::vector<double>>;

// Fuses time parameters into the carrier row (vector fusion). `rel` has one
// row per head atom, `time` one row per time atom. Non-carrier rows pass
// through unchanged.
ParamRows ApplyTimeFusion(const OperatorPipeline& pipeline,
                          const ParamRows& rel, const ParamRows& time);

// Applies the head atoms in order using fused rows.
std::vector<double> ApplyPipeline(const OperatorPipeline& pipeline,
                                  const ParamRows& fused,
                                  std::span<const double> head);

// Matrix fusion: time atoms act on the head vector right after the carrier.
std::vector<double> ApplyPipelineMatrixFusion(const OperatorPipeline& pipeline,
                                              const ParamRows& rel,
                                              const ParamRows& time,
                                              std::span<const double> head);

// ---------------------------------------------------------------------------
// Exact affine-map oracle. Double precision, materializes d x d matrices.

struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  static AffineMap Identity(std::size_t dim);
  std::size_t dim() const { return static_cast<std::size_t>(offset.size()); }
  Eigen::VectorXd Apply(const Eigen::VectorXd& x) const;
};

// Returns the map x -> after(before(x)).
AffineMap Compose(const AffineMap& after, const AffineMap& before);

// The affine map of a single atom acting on vectors of width `dim`.
AffineMap AtomAffine(OpKind kind, std::span<const double> params,
                     std::size_t dim);

// Composes the head atoms (with fused rows) into one affine map.
AffineMap AffineOracle(const OperatorPipeline& pipeline,
                       const ParamRows& fused, std::size_t dim);

// Independent route to the fused rows: the carrier row is pushed through the
// matrix form of every time atom.
ParamRows OracleFuse(const OperatorPipeline& pipeline, const ParamRows& rel,
                     const ParamRows& time);

// Matrix-fusion counterpart of AffineOracle.
AffineMap AffineOracleMatrixFusion(const OperatorPipeline& pipeline,
                                   const ParamRows& rel, const ParamRows& time,
                                   std::size_t dim);

}  // namespace tce

#endif  // TCE_GEOMETRY_H_
