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

#include "tce/data.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace tce {

namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

bool ParseInteger(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::unordered_map<std::string, Id> IndexOf(const std::vector<std::string>& names,
                                            const char* what) {
  std::unordered_map<std::string, Id> ids;
  ids.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!ids.emplace(names[i], static_cast<Id>(i)).second)
      throw DataError(std::string("duplicate ") + what + " '" + names[i] + "'");
  }
  return ids;
}

Id Lookup(const std::unordered_map<std::string, Id>& ids, const std::string& name,
          const char* what) {
  auto it = ids.find(name);
  if (it == ids.end()) throw DataError(std::string("unknown ") + what + " '" + name + "'");
  return it->second;
}

}  // namespace

std::vector<std::string> SortTimestamps(std::vector<std::string> stamps) {
  std::sort(stamps.begin(), stamps.end());
  stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());
  std::vector<long long> values(stamps.size());
  bool numeric = !stamps.empty();
  for (std::size_t i = 0; i < stamps.size() && numeric; ++i)
    numeric = ParseInteger(stamps[i], values[i]);
  if (!numeric) return stamps;

  std::vector<std::size_t> order(stamps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::string> sorted;
  sorted.reserve(stamps.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && values[order[i]] == values[order[i - 1]]) {
      throw DataError("timestamps '" + stamps[order[i - 1]] + "' and '" +
                      stamps[order[i]] + "' denote the same day");
    }
    sorted.push_back(stamps[order[i]]);
  }
  return sorted;
}

Vocabulary Vocabulary::Build(std::vector<std::string> entities,
                             std::vector<std::string> relations,
                             std::vector<std::string> timestamps) {
  Vocabulary v;
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  std::sort(relations.begin(), relations.end());
  relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
  v.entities_ = std::move(entities);
  v.relations_ = std::move(relations);
  v.timestamps_ = SortTimestamps(std::move(timestamps));
  v.entity_ids_ = IndexOf(v.entities_, "entity");
  v.relation_ids_ = IndexOf(v.relations_, "relation");
  v.timestamp_ids_ = IndexOf(v.timestamps_, "timestamp");
  return v;
}

std::string Vocabulary::relation(Id id) const {
  if (id < relations_.size()) return relations_[id];
  if (id < 2 * relations_.size()) return relations_[id - relations_.size()] + "^-1";
  throw IdError("relation id out of range");
}

Id Vocabulary::entity_id(const std::string& name) const {
  return Lookup(entity_ids_, name, "entity");
}
Id Vocabulary::relation_id(const std::string& name) const {
  return Lookup(relation_ids_, name, "relation");
}
Id Vocabulary::timestamp_id(const std::string& name) const {
  return Lookup(timestamp_ids_, name, "timestamp");
}

namespace {

struct RawFact {
  std::string head, rel, tail, time;
};

std::filesystem::path FindSplit(const std::filesystem::path& dir, const char* split) {
  for (const auto& candidate : {std::string(split), std::string(split) + ".txt"}) {
    const auto p = dir / candidate;
    if (std::filesystem::is_regular_file(p)) return p;
  }
  throw DataError("missing split file '" + (dir / split).string() + "'");
}

std::vector<RawFact> ReadSplit(const std::filesystem::path& path,
                               std::vector<std::string>& warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<RawFact> facts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) {
      warnings.push_back(path.string() + ":" + std::to_string(line_no) + ": blank line skipped");
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(Trim(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4 ||
        std::any_of(fields.begin(), fields.end(), [](const auto& f) { return f.empty(); })) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 4 non-empty tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    facts.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2]),
                     std::move(fields[3])});
  }
  return facts;
}

}  // namespace

Dataset LoadDataset(const std::filesystem::path& dir, const std::string& name) {
  if (!std::filesystem::is_directory(dir))
    throw DataError("dataset directory '" + dir.string() + "' does not exist");
  Dataset ds;
  ds.name = name.empty() ? dir.filename().string() : name;
  const char* splits[] = {"train", "valid", "test"};
  std::vector<std::filesystem::path> paths;
  for (const char* s : splits) paths.push_back(FindSplit(dir, s));

  std::vector<std::vector<RawFact>> raw;
  for (const auto& p : paths) raw.push_back(ReadSplit(p, ds.warnings));

  std::vector<std::string> entities, relations, stamps;
  for (const auto& split : raw) {
    for (const auto& f : split) {
      entities.push_back(f.head);
      entities.push_back(f.tail);
      relations.push_back(f.rel);
      stamps.push_back(f.time);
    }
  }
  ds.vocab = Vocabulary::Build(std::move(entities), std::move(relations), std::move(stamps));

  std::vector<Quadruple>* outs[] = {&ds.train, &ds.valid, &ds.test};
  for (std::size_t s = 0; s < 3; ++s) {
    outs[s]->reserve(raw[s].size());
    for (const auto& f : raw[s]) {
      outs[s]->push_back({ds.vocab.entity_id(f.head), ds.vocab.relation_id(f.rel),
                          ds.vocab.entity_id(f.tail), ds.vocab.timestamp_id(f.time)});
    }
  }
  return ds;
}

void WriteDatasetTsv(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const std::vector<Quadruple>*> splits[] = {
      {"train", &dataset.train}, {"valid", &dataset.valid}, {"test", &dataset.test}};
  for (const auto& [name, facts] : splits) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write '" + (dir / name).string() + "'");
    for (const auto& q : *facts) {
      out << dataset.vocab.entity(q.head) << '\t' << dataset.vocab.relation(q.rel) << '\t'
          << dataset.vocab.entity(q.tail) << '\t' << dataset.vocab.timestamp(q.time) << '\n';
    }
  }
}

std::vector<Quadruple> AugmentReciprocal(std::span<const Quadruple> facts,
                                         std::size_t num_relations) {
  std::vector<Quadruple> out;
  out.reserve(2 * facts.size());
  for (const auto& q : facts) {
    if (q.rel >= num_relations)
      throw DataError("relation id " + std::to_string(q.rel) +
                      " already in the reciprocal range; facts augmented twice?");
    out.push_back(q);
    out.push_back({q.tail, static_cast<Id>(q.rel + num_relations), q.head, q.time});
  }
  return out;
}

std::size_t FilterIndex::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = k.head;
  h = h * 0x9E3779B97F4A7C15ULL + k.rel;
  h = h * 0x9E3779B97F4A7C15ULL + k.time;
  h ^= h >> 31;
  return static_cast<std::size_t>(h);
}

void FilterIndex::Add(const Quadruple& q) {
  sets_[{q.head, q.rel, q.time}].push_back(q.tail);
}

void FilterIndex::Finalize() {
  for (auto& [key, tails] : sets_) {
    std::sort(tails.begin(), tails.end());
    tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
  }
}

std::span<const Id> FilterIndex::Tails(Id head, Id rel, Id time) const {
  auto it = sets_.find({head, rel, time});
  if (it == sets_.end()) return {};
  return it->second;
}

bool FilterIndex::Contains(const Quadruple& q) const {
  const auto tails = Tails(q.head, q.rel, q.time);
  return std::binary_search(tails.begin(), tails.end(), q.tail);
}

std::size_t FilterIndex::total_size() const {
  std::size_t n = 0;
  for (const auto& [key, tails] : sets_) n += tails.size();
  return n;
}

FilterIndex BuildFilterIndex(std::span<const std::vector<Quadruple>> augmented_splits) {
  FilterIndex index;
  for (const auto& split : augmented_splits)
    for (const auto& q : split) index.Add(q);
  index.Finalize();
  return index;
}

Dataset MakeSyntheticDataset(std::size_t num_entities, std::size_t num_relations,
                             std::size_t num_times, std::size_t num_train,
                             std::size_t num_valid, std::size_t num_test,
                             std::uint64_t seed) {
  const std::size_t space = num_entities * num_entities * num_relations * num_times;
  if (num_train + num_valid + num_test > space)
    throw DataError("synthetic graph asks for more distinct facts than exist");

  std::vector<std::string> entities, relations, stamps;
  for (std::size_t i = 0; i < num_entities; ++i) entities.push_back("e" + std::to_string(i));
  for (std::size_t i = 0; i < num_relations; ++i) relations.push_back("r" + std::to_string(i));
  using namespace std::chrono;
  const sys_days start = year{2014} / January / 1;
  for (std::size_t i = 0; i < num_times; ++i) {
    const year_month_day ymd{start + days{static_cast<int>(i)}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    stamps.emplace_back(buf);
  }

  Dataset ds;
  ds.name = "synthetic";
  ds.vocab = Vocabulary::Build(entities, relations, stamps);

  std::mt19937_64 rng(seed);
  std::set<Quadruple> seen;
  auto draw = [&](std::size_t n, std::vector<Quadruple>& out) {
    while (out.size() < n) {
      // Names sort lexicographically ("e10" < "e2"); draw through the vocabulary.
      const Quadruple q{
          ds.vocab.entity_id(entities[rng() % num_entities]),
          ds.vocab.relation_id(relations[rng() % num_relations]),
          ds.vocab.entity_id(entities[rng() % num_entities]),
          ds.vocab.timestamp_id(stamps[rng() % num_times])};
      if (seen.insert(q).second) out.push_back(q);
    }
  };
  draw(num_train, ds.train);
  draw(num_valid, ds.valid);
  draw(num_test, ds.test);
  return ds;
}

}  // namespace tce
