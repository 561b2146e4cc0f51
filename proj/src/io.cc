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

#include "tce/io.h"

#include <bit>
#include <cstring>

namespace tce {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

BinaryWriter::BinaryWriter(std::filesystem::path path)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open '" + tmp_.string() + "' for writing");
}

BinaryWriter::~BinaryWriter() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void BinaryWriter::Magic(std::string_view magic) { out_.write(magic.data(), 4); }
void BinaryWriter::U8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
void BinaryWriter::U32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
void BinaryWriter::F32(float v) { out_.write(reinterpret_cast<const char*>(&v), 4); }

void BinaryWriter::String(std::string_view s) {
  U32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::Commit() {
  out_.flush();
  if (!out_) throw IoError("write to '" + tmp_.string() + "' failed (disk full?)");
  out_.close();
  if (out_.fail()) throw IoError("closing '" + tmp_.string() + "' failed");
  std::filesystem::rename(tmp_, path_);
  committed_ = true;
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open '" + path.string() + "'");
}

void BinaryReader::Read(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n)
    throw IoError("'" + path_.string() + "' is truncated");
}

void BinaryReader::ExpectMagic(std::string_view magic) {
  char buf[4];
  Read(buf, 4);
  if (std::string_view(buf, 4) != magic)
    throw IoError("'" + path_.string() + "' is not a " + std::string(magic) + " file");
}

std::uint8_t BinaryReader::U8() {
  char c;
  Read(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t BinaryReader::U32() {
  std::uint32_t v;
  Read(reinterpret_cast<char*>(&v), 4);
  return v;
}

float BinaryReader::F32() {
  float v;
  Read(reinterpret_cast<char*>(&v), 4);
  return v;
}

std::string BinaryReader::String() {
  const std::uint32_t n = U32();
  std::string s(n, '\0');
  Read(s.data(), n);
  return s;
}

bool BinaryReader::AtEnd() { return in_.peek() == std::ifstream::traits_type::eof(); }

std::string PeekMagic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[4];
  if (!in.read(buf, 4)) return {};
  return std::string(buf, 4);
}

namespace {

std::uint32_t Narrow(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw IoError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

template <class Real>
void SaveCheckpoint(const std::filesystem::path& path, const Model<Real>& model,
                    const AdagradState<Real>& state) {
  const auto& shape = model.shape();
  BinaryWriter w(path);
  w.Magic("TCE1");
  w.U32(kCheckpointVersion);
  w.U32(Narrow(shape.dim, "dim"));
  w.U32(Narrow(shape.num_entities, "entity count"));
  w.U32(Narrow(shape.augmented_relations(), "relation count"));
  w.U32(Narrow(shape.num_times, "timestamp count"));
  w.String(model.options().variant);
  w.U8(static_cast<std::uint8_t>(model.options().score));
  w.U8(static_cast<std::uint8_t>(model.options().fusion));
  w.U32(static_cast<std::uint32_t>(kNumTables));
  for (const auto& t : model.tables()) w.U32(Narrow(t.cols(), "table width"));
  for (const auto& t : model.tables()) w.Floats<Real>(t.data());
  for (const auto& a : state.accumulators) {
    if (a.data().size() != model.tables()[&a - state.accumulators.data()].data().size())
      throw IoError("optimizer state does not match the model");
    w.Floats<Real>(a.data());
  }
  w.Commit();
}

namespace {

CheckpointHeader ReadHeader(BinaryReader& r) {
  r.ExpectMagic("TCE1");
  CheckpointHeader h;
  h.version = r.U32();
  if (h.version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(h.version));
  h.shape.dim = r.U32();
  h.shape.num_entities = r.U32();
  const std::uint32_t aug = r.U32();
  if (aug % 2 != 0) throw IoError("checkpoint relation count is not even");
  h.shape.num_relations = aug / 2;
  h.shape.num_times = r.U32();
  h.options.variant = r.String();
  const auto score = r.U8();
  const auto fusion = r.U8();
  if (score > 1 || fusion > 1) throw IoError("corrupt checkpoint header");
  h.options.score = static_cast<ScoreKind>(score);
  h.options.fusion = static_cast<Fusion>(fusion);
  if (r.U32() != kNumTables) throw IoError("unexpected table count in checkpoint");
  for (auto& w : h.widths) w = r.U32();
  return h;
}

}  // namespace

CheckpointHeader ReadCheckpointHeader(const std::filesystem::path& path) {
  BinaryReader r(path);
  return ReadHeader(r);
}

template <class Real>
Checkpoint<Real> LoadCheckpoint(const std::filesystem::path& path) {
  BinaryReader r(path);
  const CheckpointHeader h = ReadHeader(r);
  Checkpoint<Real> ckpt{Model<Real>(h.shape, h.options), {}};
  for (std::size_t t = 0; t < kNumTables; ++t) {
    if (ckpt.model.tables()[t].cols() != h.widths[t])
      throw IoError("checkpoint table '" + std::string(TableName(static_cast<TableId>(t))) +
                    "' has width " + std::to_string(h.widths[t]) + ", variant expects " +
                    std::to_string(ckpt.model.tables()[t].cols()));
  }
  for (auto& t : ckpt.model.tables()) r.Floats<Real>(std::span<Real>(t.data()));
  ckpt.state = AdagradState<Real>(ckpt.model);
  for (auto& a : ckpt.state.accumulators) r.Floats<Real>(std::span<Real>(a.data()));
  if (!r.AtEnd()) throw IoError("trailing bytes in checkpoint '" + path.string() + "'");
  return ckpt;
}

template void SaveCheckpoint<float>(const std::filesystem::path&, const Model<float>&,
                                    const AdagradState<float>&);
template void SaveCheckpoint<double>(const std::filesystem::path&, const Model<double>&,
                                     const AdagradState<double>&);
template Checkpoint<float> LoadCheckpoint<float>(const std::filesystem::path&);
template Checkpoint<double> LoadCheckpoint<double>(const std::filesystem::path&);

void SaveDatasetCache(const std::filesystem::path& path, const Dataset& dataset) {
  BinaryWriter w(path);
  w.Magic("TCD1");
  w.U32(1);
  w.String(dataset.name);
  const std::vector<std::string>* names[] = {&dataset.vocab.entities(),
                                             &dataset.vocab.relations(),
                                             &dataset.vocab.timestamps()};
  for (const auto* list : names) {
    w.U32(Narrow(list->size(), "vocabulary size"));
    for (const auto& s : *list) w.String(s);
  }
  for (const auto* split : {&dataset.train, &dataset.valid, &dataset.test}) {
    w.U32(Narrow(split->size(), "split size"));
    for (const auto& q : *split) {
      w.U32(q.head);
      w.U32(q.rel);
      w.U32(q.tail);
      w.U32(q.time);
    }
  }
  w.Commit();
}

Dataset LoadDatasetCache(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.ExpectMagic("TCD1");
  if (r.U32() != 1) throw IoError("unsupported dataset cache version");
  Dataset ds;
  ds.name = r.String();
  std::vector<std::string> lists[3];
  for (auto& list : lists) {
    list.resize(r.U32());
    for (auto& s : list) s = r.String();
  }
  ds.vocab = Vocabulary::Build(lists[0], lists[1], lists[2]);
  if (ds.vocab.entities() != lists[0] || ds.vocab.relations() != lists[1] ||
      ds.vocab.timestamps() != lists[2])
    throw IoError("dataset cache vocabulary is not in canonical order");
  for (auto* split : {&ds.train, &ds.valid, &ds.test}) {
    split->resize(r.U32());
    for (auto& q : *split) {
      q.head = r.U32();
      q.rel = r.U32();
      q.tail = r.U32();
      q.time = r.U32();
      if (q.head >= ds.vocab.num_entities() || q.tail >= ds.vocab.num_entities() ||
          q.rel >= ds.vocab.num_relations() || q.time >= ds.vocab.num_times())
        throw IoError("dataset cache holds an out-of-range id");
    }
  }
  if (!r.AtEnd()) throw IoError("trailing bytes in dataset cache");
  return ds;
}

Dataset LoadDatasetAuto(const std::filesystem::path& path) {
  if (std::filesystem::is_regular_file(path) && PeekMagic(path) == "TCD1")
    return LoadDatasetCache(path);
  return LoadDataset(path);
}

}  // namespace tce
