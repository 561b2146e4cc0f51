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

#ifndef TCE_MODEL_H_
#define TCE_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tce/geometry.h"
#include "tce/types.h"

namespace tce {

enum class ScoreKind : std::uint8_t { kSimilarity, kDistance };

const char* ToString(ScoreKind kind);
ScoreKind ParseScoreKind(const std::string& name);

enum class TableId : std::uint8_t {
  kEntity = 0,
  kRelTranslate,
  kRelScale,
  kRelRotate,
  kTimeTranslate,
  kTimeScale,
  kTimeRotate,
};
inline constexpr std::size_t kNumTables = 7;

const char* TableName(TableId id);
TableId TableFor(OpKind kind, ParamSource source);

// A named model variant: which atoms act on the head, which time atoms are
// fused and into which relation atom.
struct VariantSpec {
  std::string name;
  OperatorPipeline pipeline;
};

// TCompoundE followed by V1..V15.
const std::vector<VariantSpec>& VariantRegistry();
const VariantSpec& FindVariant(const std::string& name);

struct ModelShape {
  std::size_t dim = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // base relations, before reciprocal augmentation
  std::size_t num_times = 0;

  std::size_t augmented_relations() const { return 2 * num_relations; }
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

struct ModelOptions {
  std::string variant = "TCompoundE";
  Fusion fusion = Fusion::kVector;
  ScoreKind score = ScoreKind::kSimilarity;
};

// Gradient rows keyed by (table, row); ordered for deterministic iteration.
using SparseGrad = std::map<std::pair<TableId, Id>, std::vector<double>>;

void AccumulateRow(SparseGrad& grad, TableId table, Id row,
                   std::span<const double> values, double scale = 1.0);

class GradSink {
 public:
  virtual ~GradSink() = default;
  virtual void Add(TableId table, std::size_t row,
                   std::span<const double> values) = 0;
};

class SparseGradSink : public GradSink {
 public:
  explicit SparseGradSink(SparseGrad& out) : out_(out) {}
  void Add(TableId table, std::size_t row,
           std::span<const double> values) override {
    AccumulateRow(out_, table, static_cast<Id>(row), values);
  }

 private:
  SparseGrad& out_;
};

template <class Real>
class Model {
 public:
  // Scratch for one (head, rel, time) query. Reusable across calls.
  struct Workspace {
    std::vector<std::vector<Real>> fused;          // per head atom
    std::vector<std::vector<Real>> carrier_trace;  // carrier before each time atom
    std::vector<std::vector<Real>> inputs;         // vector entering each step
    std::vector<Real> head;                        // transformed head
    std::vector<Real> relation_sum;                // N3 relation vector
  };

  Model(const ModelShape& shape, const ModelOptions& options);

  const ModelShape& shape() const { return shape_; }
  const ModelOptions& options() const { return options_; }
  const VariantSpec& variant() const { return *variant_; }
  const std::vector<LoweredStep>& steps() const { return steps_; }

  EmbeddingTable<Real>& table(TableId id) { return tables_[Index(id)]; }
  const EmbeddingTable<Real>& table(TableId id) const { return tables_[Index(id)]; }
  std::array<EmbeddingTable<Real>, kNumTables>& tables() { return tables_; }
  const std::array<EmbeddingTable<Real>, kNumTables>& tables() const { return tables_; }

  // Width of a table for this variant (0 when unused).
  std::size_t TableWidth(TableId id) const { return widths_[Index(id)]; }
  bool UsesTable(TableId id) const { return widths_[Index(id)] != 0; }
  std::size_t TableRows(TableId id) const;

  // Every entry i.i.d. N(0, init_scale^2). With `scale_at_identity` the scale
  // tables are drawn around 1 instead of 0.
  void InitGaussian(std::uint64_t seed, double init_scale,
                    bool scale_at_identity = false);
  // Translations and angles to 0, scales to 1. Entities untouched.
  void SetIdentityOperators();

  void CheckQuery(Id head, Id rel, Id time) const;
  void CheckQuadruple(const Quadruple& q) const;

  // Computes fused rows and the transformed head of `x` under (rel, time).
  void Transform(std::span<const Real> x, Id rel, Id time, Workspace& ws) const;
  void TransformHead(Id head, Id rel, Id time, Workspace& ws) const {
    Transform(tables_[0].row(head), rel, time, ws);
  }

  // Reverse-mode pass over the last Transform. `d_head` is the upstream
  // gradient of the transformed head (may be empty), `d_relation_sum` the
  // upstream gradient of ws.relation_sum (may be empty). Writes the entity
  // gradient to row `head` of the entity table.
  void Backward(const Workspace& ws, Id head, Id rel, Id time,
                std::span<const double> d_head,
                std::span<const double> d_relation_sum, GradSink& sink) const;

  // Score of a transformed head against entity `tail`.
  double ScoreTransformed(std::span<const Real> transformed, Id tail) const;
  // Gradient of ScoreTransformed w.r.t. the transformed head and the tail.
  void ScoreTransformedGradient(std::span<const Real> transformed, Id tail,
                                std::span<double> d_head,
                                std::span<double> d_tail) const;

  double Score(const Quadruple& q) const;
  std::vector<double> ScoreAllTails(Id head, Id rel, Id time) const;
  void ScoreAllTails(std::span<const Real> transformed,
                     std::span<double> out) const;

  // Closed-form gradient of the similarity score of TCompoundE under vector
  // fusion. Throws std::invalid_argument for any other configuration.
  SparseGrad ScoreGradients(const Quadruple& q, double upstream) const;
  // Reverse-mode gradient for any variant, fusion and scorer.
  SparseGrad ScoreGradientsGeneric(const Quadruple& q, double upstream) const;

  // The head vector after each lowered step, starting with the raw entity.
  std::vector<std::vector<Real>> Stages(Id head, Id rel, Id time) const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.shape_ == b.shape_ && a.options_.variant == b.options_.variant &&
           a.options_.fusion == b.options_.fusion &&
           a.options_.score == b.options_.score && a.tables_ == b.tables_;
  }

 private:
  static constexpr std::size_t Index(TableId id) { return static_cast<std::size_t>(id); }
  std::span<const Real> StepParams(const LoweredStep& step, const Workspace& ws,
                                   Id time) const;

  ModelShape shape_;
  ModelOptions options_;
  const VariantSpec* variant_;
  std::vector<LoweredStep> steps_;
  std::array<std::size_t, kNumTables> widths_{};
  std::array<EmbeddingTable<Real>, kNumTables> tables_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace tce

#endif  // TCE_MODEL_H_
