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

#ifndef TCE_DATA_H_
#define TCE_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tce/types.h"

namespace tce {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bidirectional string <-> id maps. Relation ids at or above num_relations()
// name reciprocal relations.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Ids are assigned in sorted order: entities and relations
  // lexicographically, timestamps chronologically.
  static Vocabulary Build(std::vector<std::string> entities,
                          std::vector<std::string> relations,
                          std::vector<std::string> timestamps);

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  std::size_t num_times() const { return timestamps_.size(); }

  const std::string& entity(Id id) const { return entities_.at(id); }
  const std::string& timestamp(Id id) const { return timestamps_.at(id); }
  // Base name, or "<name>^-1" for reciprocal ids.
  std::string relation(Id id) const;

  Id entity_id(const std::string& name) const;
  Id relation_id(const std::string& name) const;
  Id timestamp_id(const std::string& name) const;

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<std::string>& timestamps() const { return timestamps_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_ &&
           a.timestamps_ == b.timestamps_;
  }

 private:
  std::vector<std::string> entities_, relations_, timestamps_;
  std::unordered_map<std::string, Id> entity_ids_, relation_ids_, timestamp_ids_;
};

// Sort key for timestamps: integers compare numerically when every stamp is
// an integer (GDELT day offsets); otherwise ISO dates compare as strings.
std::vector<std::string> SortTimestamps(std::vector<std::string> stamps);

struct Dataset {
  std::string name;
  Vocabulary vocab;
  std::vector<Quadruple> train, valid, test;  // not augmented
  std::vector<std::string> warnings;
};

// Reads tab-separated `train`, `valid`, `test` (optionally with a .txt
// suffix) from `dir`. Throws DataError naming the file (and line) on failure.
Dataset LoadDataset(const std::filesystem::path& dir, const std::string& name = "");

// Writes the three splits back as TSV using vocabulary strings.
void WriteDatasetTsv(const Dataset& dataset, const std::filesystem::path& dir);

// Adds (tail, rel + num_relations, head, time) after every fact.
std::vector<Quadruple> AugmentReciprocal(std::span<const Quadruple> facts,
                                         std::size_t num_relations);

// Known-true tails per (head, rel, time) over augmented facts.
class FilterIndex {
 public:
  void Add(const Quadruple& q);
  // Sorts and deduplicates every tail set. Must run before lookups.
  void Finalize();

  // Empty span when the key is unknown.
  std::span<const Id> Tails(Id head, Id rel, Id time) const;
  bool Contains(const Quadruple& q) const;
  std::size_t num_keys() const { return sets_.size(); }
  std::size_t total_size() const;

 private:
  struct Key {
    Id head, rel, time;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  std::unordered_map<Key, std::vector<Id>, KeyHash> sets_;
};

FilterIndex BuildFilterIndex(std::span<const std::vector<Quadruple>> augmented_splits);

// Random distinct facts over the given vocabulary sizes. Entity names "e<i>",
// relation names "r<i>", timestamps "2014-01-01" + i days.
Dataset MakeSyntheticDataset(std::size_t num_entities, std::size_t num_relations,
                             std::size_t num_times, std::size_t num_train,
                             std::size_t num_valid, std::size_t num_test,
                             std::uint64_t seed);

}  // namespace tce

#endif  // TCE_DATA_H_
