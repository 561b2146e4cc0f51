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

// Constructive parameter settings that realize relation patterns, checked
// through the public score only, plus detectors for trained models.

#ifndef TCE_PATTERNS_H_
#define TCE_PATTERNS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tce/data.h"
#include "tce/model.h"

namespace tce {

enum class Pattern { kSymmetric, kAsymmetric, kInverse, kTemporalEvolution };
const char* ToString(Pattern p);

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RelationParams {
  std::vector<double> translate;  // t_r
  std::vector<double> scale;      // s_r
};

struct TimeParams {
  std::vector<double> translate;  // t_tau
  std::vector<double> scale;      // s_tau
};

// Fused scale s_tau * (s_r + t_tau).
std::vector<double> FusedScale(const RelationParams& r, const TimeParams& t);

// Explicit parameters for the relations and timestamps a pattern involves.
// Relations and times are addressed by their position in these vectors.
struct PatternWitness {
  Pattern pattern = Pattern::kSymmetric;
  std::size_t dim = 0;
  std::vector<RelationParams> relations;
  std::vector<TimeParams> times;
  double tolerance = 1e-12;
  // Zero fused scale: every score is 0, so the witness says nothing.
  bool degenerate = false;
};

struct WitnessOptions {
  std::size_t dim = 16;
  std::uint64_t seed = 0;
};

// t_r = 0 with a generic nonzero fused scale.
PatternWitness ConstructSymmetric(const WitnessOptions& options = {});
// Generic nonzero t_r. With `zero_scale` the fused scale is 0 (degenerate).
PatternWitness ConstructAsymmetric(const WitnessOptions& options = {},
                                   bool zero_scale = false);
// Two relations with zero translations and equal fused scales.
PatternWitness ConstructInverse(const WitnessOptions& options = {});
// (r1, tau1) random; (r2, tau2) solved so both composed maps coincide.
PatternWitness ConstructTemporalEvolution(const WitnessOptions& options = {});

// s_r2 = (s_tau1 * (s_r1 + t_tau1)) / s_tau2 - t_tau2 and t_r2 = t_r1.
// Throws PatternError when s_tau2 has a zero entry.
RelationParams SolveTemporalEvolution(const RelationParams& r1, const TimeParams& tau1,
                                      const TimeParams& tau2);

// Throws PatternError when the witness cannot stand for its pattern
// (t_r = 0 for an asymmetric witness, mismatched widths, missing rows).
void ValidateWitness(const PatternWitness& witness);

// A TCompoundE double model holding the witness rows and random entities.
Model<double> WitnessModel(const PatternWitness& witness, std::size_t num_entities,
                           std::uint64_t seed);

struct VerifyOptions {
  std::size_t pairs = 1000;
  std::size_t num_entities = 64;
  std::uint64_t seed = 1;
  double asymmetry_gap = 1e-6;   // gap counted as "different"
  double min_asymmetry_rate = 0.99;
};

struct WitnessResult {
  Pattern pattern = Pattern::kSymmetric;
  bool passed = false;
  bool excluded = false;      // degenerate witness, not evaluated
  std::size_t pairs = 0;
  double max_gap = 0.0;       // largest relative gap among equalities
  double asymmetry_rate = 0.0;
  // Inverse control: share of pairs broken by a 1% perturbation of r2's scale.
  std::optional<double> control_rate;
  std::string detail;
};

// |a - b| / max(|a|, |b|), 0 when both are 0.
double RelativeGap(double a, double b);

WitnessResult VerifyWitness(const PatternWitness& witness, const VerifyOptions& options = {});

// "witness=<name> status=<pass|fail|excluded> ..." on one line.
std::string FormatWitnessResult(const WitnessResult& result);

struct RelationPatternReport {
  std::string relation;
  std::size_t samples = 0;
  double sym_gap = 0.0;
  std::optional<std::string> inv_partner;  // set when inv_gap < tol
  double inv_gap = 0.0;                    // best gap over candidate partners
  bool symmetric = false;
};

struct DetectOptions {
  double tolerance = 1e-6;
  std::size_t samples_per_relation = 20;
  std::uint64_t seed = 0;
};

// Mean relative score gaps over sampled training facts of each base relation.
// Relations without facts are omitted. Throws PatternError when no relation
// has a sample.
template <class Real>
std::vector<RelationPatternReport> DetectPatterns(const Model<Real>& model,
                                                  const Dataset& dataset,
                                                  const DetectOptions& options = {});

// "rel=<name> sym_gap=<float> inv_partner=<name|none> inv_gap=<float>".
std::string FormatPatternReport(const RelationPatternReport& report);

}  // namespace tce

#endif  // TCE_PATTERNS_H_
