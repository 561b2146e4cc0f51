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

#ifndef TCE_IO_H_
#define TCE_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tce/data.h"
#include "tce/model.h"
#include "tce/train.h"

namespace tce {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Little-endian container writer. Output goes to "<path>.tmp" and is renamed
// into place by Commit(), so a failed write never leaves a partial file.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::filesystem::path path);
  ~BinaryWriter();
  BinaryWriter(const BinaryWriter&) = delete;
  BinaryWriter& operator=(const BinaryWriter&) = delete;

  void Magic(std::string_view magic);
  void U8(std::uint8_t v);
  void U32(std::uint32_t v);
  void String(std::string_view s);
  template <class Real>
  void Floats(std::span<const Real> values) {
    for (Real v : values) F32(static_cast<float>(v));
  }
  void F32(float v);
  void Commit();

 private:
  std::filesystem::path path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  void ExpectMagic(std::string_view magic);
  std::uint8_t U8();
  std::uint32_t U32();
  std::string String();
  float F32();
  template <class Real>
  void Floats(std::span<Real> out) {
    for (auto& v : out) v = static_cast<Real>(F32());
  }
  bool AtEnd();

 private:
  void Read(char* dst, std::size_t n);
  std::filesystem::path path_;
  std::ifstream in_;
};

// Reads the first four bytes of a file ("" when shorter or unreadable).
std::string PeekMagic(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::uint32_t version = kCheckpointVersion;
  ModelShape shape;
  ModelOptions options;
  std::array<std::uint32_t, kNumTables> widths{};
};

template <class Real>
struct Checkpoint {
  Model<Real> model;
  AdagradState<Real> state;
};

template <class Real>
void SaveCheckpoint(const std::filesystem::path& path, const Model<Real>& model,
                    const AdagradState<Real>& state);

CheckpointHeader ReadCheckpointHeader(const std::filesystem::path& path);

template <class Real>
Checkpoint<Real> LoadCheckpoint(const std::filesystem::path& path);

// Preprocessed dataset cache ("TCD1"): vocabulary plus id-encoded splits.
void SaveDatasetCache(const std::filesystem::path& path, const Dataset& dataset);
Dataset LoadDatasetCache(const std::filesystem::path& path);

// A TCD1 cache file or a directory of TSV splits.
Dataset LoadDatasetAuto(const std::filesystem::path& path);

}  // namespace tce

#endif  // TCE_IO_H_
