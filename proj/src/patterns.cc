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

#include "tce/patterns.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace tce {

const char* ToString(Pattern p) {
  switch (p) {
    case Pattern::kSymmetric: return "symmetric";
    case Pattern::kAsymmetric: return "asymmetric";
    case Pattern::kInverse: return "inverse";
    case Pattern::kTemporalEvolution: return "temporal_evolution";
  }
  return "?";
}

std::vector<double> FusedScale(const RelationParams& r, const TimeParams& t) {
  std::vector<double> out(r.scale.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.scale[i] * (r.scale[i] + t.translate[i]);
  return out;
}

double RelativeGap(double a, double b) {
  const double denom = std::max(std::abs(a), std::abs(b));
  if (denom == 0.0) return 0.0;
  return std::abs(a - b) / denom;
}

namespace {

std::vector<double> Gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

RelationParams RandomRelation(std::size_t dim, std::mt19937_64& rng) {
  RelationParams r;
  r.translate = Gaussian(dim, rng);
  r.scale = Gaussian(dim, rng);
  return r;
}

TimeParams RandomTime(std::size_t dim, std::mt19937_64& rng) {
  TimeParams t;
  t.translate = Gaussian(dim, rng);
  t.scale = Gaussian(dim, rng);
  return t;
}

bool AllZero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double MaxRelativeDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, RelativeGap(a[i], b[i]));
  return worst;
}

std::string Sanitize(std::string s) {
  for (auto& c : s)
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  return s;
}

}  // namespace

PatternWitness ConstructSymmetric(const WitnessOptions& options) {
  std::mt19937_64 rng(options.seed);
  PatternWitness w;
  w.pattern = Pattern::kSymmetric;
  w.dim = options.dim;
  RelationParams r = RandomRelation(options.dim, rng);
  std::fill(r.translate.begin(), r.translate.end(), 0.0);
  w.relations = {std::move(r)};
  w.times = {RandomTime(options.dim, rng)};
  return w;
}

PatternWitness ConstructAsymmetric(const WitnessOptions& options, bool zero_scale) {
  std::mt19937_64 rng(options.seed);
  PatternWitness w;
  w.pattern = Pattern::kAsymmetric;
  w.dim = options.dim;
  w.relations = {RandomRelation(options.dim, rng)};
  w.times = {RandomTime(options.dim, rng)};
  if (zero_scale) {
    std::fill(w.times[0].scale.begin(), w.times[0].scale.end(), 0.0);
    w.degenerate = true;
  }
  return w;
}

PatternWitness ConstructInverse(const WitnessOptions& options) {
  std::mt19937_64 rng(options.seed);
  PatternWitness w;
  w.pattern = Pattern::kInverse;
  w.dim = options.dim;
  RelationParams r1 = RandomRelation(options.dim, rng);
  std::fill(r1.translate.begin(), r1.translate.end(), 0.0);
  w.relations = {r1, r1};
  w.times = {RandomTime(options.dim, rng)};
  return w;
}

RelationParams SolveTemporalEvolution(const RelationParams& r1, const TimeParams& tau1,
                                      const TimeParams& tau2) {
  const std::vector<double> fused = FusedScale(r1, tau1);
  RelationParams r2;
  r2.translate = r1.translate;
  r2.scale.resize(fused.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (tau2.scale[i] == 0.0)
      throw PatternError("time scale has a zero entry at index " + std::to_string(i) +
                         "; cannot solve for the relation scale");
    r2.scale[i] = fused[i] / tau2.scale[i] - tau2.translate[i];
  }
  return r2;
}

PatternWitness ConstructTemporalEvolution(const WitnessOptions& options) {
  std::mt19937_64 rng(options.seed);
  PatternWitness w;
  w.pattern = Pattern::kTemporalEvolution;
  w.dim = options.dim;
  RelationParams r1 = RandomRelation(options.dim, rng);
  TimeParams tau1 = RandomTime(options.dim, rng);
  TimeParams tau2 = RandomTime(options.dim, rng);
  RelationParams r2 = SolveTemporalEvolution(r1, tau1, tau2);
  w.relations = {std::move(r1), std::move(r2)};
  w.times = {std::move(tau1), std::move(tau2)};
  return w;
}

void ValidateWitness(const PatternWitness& w) {
  std::size_t want_rel = 1, want_time = 1;
  if (w.pattern == Pattern::kInverse) want_rel = 2;
  if (w.pattern == Pattern::kTemporalEvolution) want_rel = 2, want_time = 2;
  if (w.dim == 0) throw PatternError("witness dimension is 0");
  if (w.relations.size() != want_rel || w.times.size() != want_time)
    throw PatternError(std::string(ToString(w.pattern)) + " witness needs " +
                       std::to_string(want_rel) + " relation(s) and " +
                       std::to_string(want_time) + " timestamp(s)");
  for (const auto& r : w.relations)
    if (r.translate.size() != w.dim || r.scale.size() != w.dim)
      throw PatternError("relation row width does not match the witness dimension");
  for (const auto& t : w.times)
    if (t.translate.size() != w.dim || t.scale.size() != w.dim)
      throw PatternError("time row width does not match the witness dimension");

  const auto fused0 = FusedScale(w.relations[0], w.times[0]);
  if (w.degenerate != AllZero(fused0))
    throw PatternError("degenerate flag does not match the fused scale");
  switch (w.pattern) {
    case Pattern::kSymmetric:
      if (!AllZero(w.relations[0].translate))
        throw PatternError("symmetric witness needs t_r = 0");
      break;
    case Pattern::kAsymmetric:
      if (AllZero(w.relations[0].translate))
        throw PatternError("t_r = 0 gives the symmetric case, not an asymmetric witness");
      break;
    case Pattern::kInverse: {
      if (!AllZero(w.relations[0].translate) || !AllZero(w.relations[1].translate))
        throw PatternError("inverse witness needs zero translations");
      if (FusedScale(w.relations[1], w.times[0]) != fused0)
        throw PatternError("inverse witness needs equal fused scales");
      break;
    }
    case Pattern::kTemporalEvolution: {
      if (w.relations[0].translate != w.relations[1].translate)
        throw PatternError("temporal evolution witness needs t_r1 = t_r2");
      const auto fused1 = FusedScale(w.relations[1], w.times[1]);
      if (MaxRelativeDiff(fused0, fused1) > w.tolerance)
        throw PatternError("temporal evolution witness maps do not coincide");
      break;
    }
  }
}

Model<double> WitnessModel(const PatternWitness& w, std::size_t num_entities,
                           std::uint64_t seed) {
  ValidateWitness(w);
  ModelShape shape{w.dim, num_entities, w.relations.size(), w.times.size()};
  Model<double> model(shape, {"TCompoundE", Fusion::kVector, ScoreKind::kSimilarity});
  model.InitGaussian(seed, 1.0);
  auto put = [&](TableId id, std::size_t row, const std::vector<double>& v) {
    std::copy(v.begin(), v.end(), model.table(id).row(row).begin());
  };
  for (std::size_t r = 0; r < w.relations.size(); ++r) {
    put(TableId::kRelTranslate, r, w.relations[r].translate);
    put(TableId::kRelScale, r, w.relations[r].scale);
  }
  for (std::size_t t = 0; t < w.times.size(); ++t) {
    put(TableId::kTimeTranslate, t, w.times[t].translate);
    put(TableId::kTimeScale, t, w.times[t].scale);
  }
  return model;
}

WitnessResult VerifyWitness(const PatternWitness& w, const VerifyOptions& options) {
  if (options.num_entities < 2) throw PatternError("need at least two entities");
  ValidateWitness(w);
  WitnessResult result;
  result.pattern = w.pattern;
  if (w.degenerate) {
    result.excluded = true;
    result.detail = "degenerate_zero_scale";
    return result;
  }

  const Model<double> model = WitnessModel(w, options.num_entities, options.seed);
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_int_distribution<Id> pick(0, static_cast<Id>(options.num_entities - 1));
  std::vector<std::pair<Id, Id>> pairs;
  while (pairs.size() < options.pairs) {
    const Id s = pick(rng), o = pick(rng);
    if (s != o) pairs.emplace_back(s, o);
  }
  result.pairs = pairs.size();

  auto rate_above = [&](const Model<double>& m, auto&& lhs, auto&& rhs) {
    std::size_t count = 0;
    for (const auto& [s, o] : pairs)
      if (RelativeGap(m.Score(lhs(s, o)), m.Score(rhs(s, o))) > options.asymmetry_gap) ++count;
    return static_cast<double>(count) / static_cast<double>(pairs.size());
  };
  auto max_gap = [&](auto&& lhs, auto&& rhs) {
    double worst = 0.0;
    for (const auto& [s, o] : pairs)
      worst = std::max(worst, RelativeGap(model.Score(lhs(s, o)), model.Score(rhs(s, o))));
    return worst;
  };

  auto fwd = [](Id s, Id o) { return Quadruple{s, 0, o, 0}; };
  auto swapped = [](Id s, Id o) { return Quadruple{o, 0, s, 0}; };
  switch (w.pattern) {
    case Pattern::kSymmetric:
      result.max_gap = max_gap(fwd, swapped);
      result.passed = result.max_gap <= w.tolerance;
      break;
    case Pattern::kAsymmetric:
      result.asymmetry_rate = rate_above(model, fwd, swapped);
      result.passed = result.asymmetry_rate >= options.min_asymmetry_rate;
      break;
    case Pattern::kInverse: {
      auto partner = [](Id s, Id o) { return Quadruple{o, 1, s, 0}; };
      result.max_gap = max_gap(fwd, partner);
      PatternWitness perturbed = w;
      for (auto& x : perturbed.relations[1].scale) x *= 1.01;
      Model<double> control = model;
      std::copy(perturbed.relations[1].scale.begin(), perturbed.relations[1].scale.end(),
                control.table(TableId::kRelScale).row(1).begin());
      result.control_rate = rate_above(control, fwd, partner);
      result.passed = result.max_gap <= w.tolerance &&
                      *result.control_rate >= options.min_asymmetry_rate;
      break;
    }
    case Pattern::kTemporalEvolution: {
      auto evolved = [](Id s, Id o) { return Quadruple{s, 1, o, 1}; };
      result.max_gap = max_gap(fwd, evolved);
      result.passed = result.max_gap <= w.tolerance;
      break;
    }
  }
  return result;
}

std::string FormatWitnessResult(const WitnessResult& r) {
  char buf[256];
  const char* status = r.excluded ? "excluded" : (r.passed ? "pass" : "fail");
  int n = std::snprintf(buf, sizeof buf, "witness=%s status=%s pairs=%zu", ToString(r.pattern),
                        status, r.pairs);
  std::string s(buf, static_cast<std::size_t>(n));
  if (r.excluded) return s + " reason=" + r.detail;
  if (r.pattern == Pattern::kAsymmetric) {
    std::snprintf(buf, sizeof buf, " asymmetry_rate=%.4f", r.asymmetry_rate);
  } else {
    std::snprintf(buf, sizeof buf, " max_gap=%.3e", r.max_gap);
  }
  s += buf;
  if (r.control_rate) {
    std::snprintf(buf, sizeof buf, " control_rate=%.4f", *r.control_rate);
    s += buf;
  }
  return s;
}

template <class Real>
std::vector<RelationPatternReport> DetectPatterns(const Model<Real>& model,
                                                  const Dataset& dataset,
                                                  const DetectOptions& options) {
  const std::size_t num_rel = dataset.vocab.num_relations();
  if (num_rel != model.shape().num_relations ||
      dataset.vocab.num_entities() != model.shape().num_entities ||
      dataset.vocab.num_times() != model.shape().num_times)
    throw PatternError("model shape does not match the dataset");

  std::vector<std::vector<Quadruple>> by_rel(num_rel);
  for (const auto& q : dataset.train) by_rel.at(q.rel).push_back(q);
  for (std::size_t r = 0; r < num_rel; ++r) {
    auto& facts = by_rel[r];
    std::mt19937_64 rng(options.seed + r);
    std::shuffle(facts.begin(), facts.end(), rng);
    if (facts.size() > options.samples_per_relation) facts.resize(options.samples_per_relation);
  }

  std::vector<RelationPatternReport> out;
  std::vector<double> forward;
  for (std::size_t r = 0; r < num_rel; ++r) {
    const auto& facts = by_rel[r];
    if (facts.empty()) continue;
    RelationPatternReport rep;
    rep.relation = Sanitize(dataset.vocab.relation(static_cast<Id>(r)));
    rep.samples = facts.size();
    const double inv_n = 1.0 / static_cast<double>(facts.size());

    forward.clear();
    for (const auto& q : facts) {
      forward.push_back(model.Score(q));
      rep.sym_gap += RelativeGap(forward.back(), model.Score({q.tail, q.rel, q.head, q.time}));
    }
    rep.sym_gap *= inv_n;
    rep.symmetric = rep.sym_gap < options.tolerance;

    std::optional<std::size_t> best;
    double best_gap = 0.0;
    for (std::size_t r2 = 0; r2 < num_rel; ++r2) {
      if (r2 == r) continue;
      double gap = 0.0;
      for (std::size_t i = 0; i < facts.size(); ++i) {
        const auto& q = facts[i];
        gap += RelativeGap(forward[i],
                           model.Score({q.tail, static_cast<Id>(r2), q.head, q.time}));
      }
      gap *= inv_n;
      if (!best || gap < best_gap) best = r2, best_gap = gap;
    }
    if (best) {
      rep.inv_gap = best_gap;
      if (best_gap < options.tolerance)
        rep.inv_partner = Sanitize(dataset.vocab.relation(static_cast<Id>(*best)));
    } else {
      rep.inv_gap = std::nan("");
    }
    out.push_back(std::move(rep));
  }
  if (out.empty()) throw PatternError("no training facts to sample");
  return out;
}

template std::vector<RelationPatternReport> DetectPatterns<float>(const Model<float>&,
                                                                  const Dataset&,
                                                                  const DetectOptions&);
template std::vector<RelationPatternReport> DetectPatterns<double>(const Model<double>&,
                                                                   const Dataset&,
                                                                   const DetectOptions&);

std::string FormatPatternReport(const RelationPatternReport& r) {
  char buf[64];
  std::string s = "rel=" + r.relation;
  std::snprintf(buf, sizeof buf, " sym_gap=%.6e", r.sym_gap);
  s += buf;
  s += " inv_partner=" + r.inv_partner.value_or("none");
  std::snprintf(buf, sizeof buf, " inv_gap=%.6e", r.inv_gap);
  s += buf;
  return s;
}

}  // namespace tce
