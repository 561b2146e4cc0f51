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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tce/data.h"
#include "tce/eval.h"
#include "tce/io.h"
#include "tce/model.h"
#include "tce/patterns.h"
#include "tce/train.h"

namespace py = pybind11;

namespace {

using tce::Dataset;
using tce::Model;

py::dict RankingDict(const tce::RankingReport& r) {
  py::dict d;
  d["mrr"] = r.mrr;
  d["hits1"] = r.hits1;
  d["hits3"] = r.hits3;
  d["hits10"] = r.hits10;
  d["n"] = r.count;
  return d;
}

const std::vector<tce::Quadruple>& Split(const Dataset& ds, const std::string& name) {
  if (name == "train") return ds.train;
  if (name == "valid") return ds.valid;
  if (name == "test") return ds.test;
  throw py::value_error("split must be train, valid or test");
}

}  // namespace

PYBIND11_MODULE(_tcompounde, m) {
  m.doc() = "TCompoundE temporal knowledge graph embeddings";

  py::register_exception<tce::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<tce::TrainError>(m, "TrainError", PyExc_RuntimeError);
  py::register_exception<tce::IoError>(m, "IoError", PyExc_OSError);

  py::class_<tce::Quadruple>(m, "Quadruple")
      .def(py::init<tce::Id, tce::Id, tce::Id, tce::Id>(), py::arg("head"), py::arg("rel"),
           py::arg("tail"), py::arg("time"))
      .def_readwrite("head", &tce::Quadruple::head)
      .def_readwrite("rel", &tce::Quadruple::rel)
      .def_readwrite("tail", &tce::Quadruple::tail)
      .def_readwrite("time", &tce::Quadruple::time)
      .def("__repr__", [](const tce::Quadruple& q) {
        return "Quadruple(" + std::to_string(q.head) + ", " + std::to_string(q.rel) + ", " +
               std::to_string(q.tail) + ", " + std::to_string(q.time) + ")";
      });

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("name", &Dataset::name)
      .def_readonly("train", &Dataset::train)
      .def_readonly("valid", &Dataset::valid)
      .def_readonly("test", &Dataset::test)
      .def_property_readonly("num_entities",
                             [](const Dataset& d) { return d.vocab.num_entities(); })
      .def_property_readonly("num_relations",
                             [](const Dataset& d) { return d.vocab.num_relations(); })
      .def_property_readonly("num_times", [](const Dataset& d) { return d.vocab.num_times(); });

  m.def("load_dataset", &tce::LoadDatasetAuto, py::arg("path"),
        "Loads a TSV dataset directory or a TCD1 cache file.");
  m.def("make_synthetic", &tce::MakeSyntheticDataset, py::arg("num_entities"),
        py::arg("num_relations"), py::arg("num_times"), py::arg("num_train"),
        py::arg("num_valid") = 0, py::arg("num_test") = 0, py::arg("seed") = 0);
  m.def("save_dataset_cache", &tce::SaveDatasetCache, py::arg("path"), py::arg("dataset"));

  py::class_<tce::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("variant", &tce::TrainConfig::variant)
      .def_readwrite("learning_rate", &tce::TrainConfig::learning_rate)
      .def_readwrite("batch_size", &tce::TrainConfig::batch_size)
      .def_readwrite("max_epochs", &tce::TrainConfig::max_epochs)
      .def_readwrite("lambda_u", &tce::TrainConfig::lambda_u)
      .def_readwrite("lambda_tau", &tce::TrainConfig::lambda_tau)
      .def_readwrite("dim", &tce::TrainConfig::dim)
      .def_readwrite("eval_every", &tce::TrainConfig::eval_every)
      .def_readwrite("patience", &tce::TrainConfig::patience)
      .def_readwrite("seed", &tce::TrainConfig::seed)
      .def_readwrite("init_scale", &tce::TrainConfig::init_scale)
      .def_readwrite("threads", &tce::TrainConfig::threads)
      .def_property(
          "scorer", [](const tce::TrainConfig& c) { return std::string(tce::ToString(c.score)); },
          [](tce::TrainConfig& c, const std::string& s) { c.score = tce::ParseScoreKind(s); })
      .def_property(
          "fusion", [](const tce::TrainConfig& c) { return std::string(tce::ToString(c.fusion)); },
          [](tce::TrainConfig& c, const std::string& s) { c.fusion = tce::ParseFusion(s); });

  py::class_<Model<double>>(m, "Model")
      .def_property_readonly("variant", [](const Model<double>& mo) { return mo.options().variant; })
      .def_property_readonly("dim", [](const Model<double>& mo) { return mo.shape().dim; })
      .def("score",
           [](const Model<double>& mo, tce::Id h, tce::Id r, tce::Id t, tce::Id tau) {
             return mo.Score({h, r, t, tau});
           },
           py::arg("head"), py::arg("rel"), py::arg("tail"), py::arg("time"))
      .def("score_all_tails",
           py::overload_cast<tce::Id, tce::Id, tce::Id>(&Model<double>::ScoreAllTails, py::const_),
           py::arg("head"), py::arg("rel"), py::arg("time"))
      .def("save",
           [](const Model<double>& mo, const std::filesystem::path& path) {
             tce::SaveCheckpoint(path, mo, tce::AdagradState<double>(mo));
           },
           py::arg("path"));

  m.def("load_checkpoint",
        [](const std::filesystem::path& path) {
          return tce::LoadCheckpoint<double>(path).model;
        },
        py::arg("path"));

  m.def("variants", [] {
    std::vector<std::string> names;
    for (const auto& v : tce::VariantRegistry()) names.push_back(v.name);
    return names;
  });

  m.def("train",
        [](const tce::TrainConfig& config, const Dataset& ds) {
          Model<double> model = tce::MakeModel<double>(config, ds);
          tce::AdagradState<double> state(model);
          tce::TrainReport report;
          {
            py::gil_scoped_release release;
            report = tce::TrainLoop(config, ds, model, state);
          }
          std::vector<double> losses;
          for (const auto& e : report.epochs) losses.push_back(e.loss);
          return py::make_tuple(std::move(model), losses);
        },
        py::arg("config"), py::arg("dataset"),
        "Trains in double precision. Returns (model, per-epoch losses).");

  m.def("evaluate",
        [](const Model<double>& model, const Dataset& ds, const std::string& split) {
          const tce::FilterIndex filter = tce::BuildDatasetFilter(ds);
          const auto r = tce::Evaluate(model, Split(ds, split), filter);
          py::dict d;
          d["tail"] = RankingDict(r.tail);
          d["head"] = RankingDict(r.head);
          d["both"] = RankingDict(r.both);
          return d;
        },
        py::arg("model"), py::arg("dataset"), py::arg("split") = "test");

  m.def("check_patterns",
        [](std::size_t dim, std::uint64_t seed) {
          const tce::WitnessOptions wo{dim, seed};
          std::vector<std::string> lines;
          for (const auto& w : {tce::ConstructSymmetric(wo), tce::ConstructAsymmetric(wo),
                                tce::ConstructInverse(wo), tce::ConstructTemporalEvolution(wo)})
            lines.push_back(tce::FormatWitnessResult(tce::VerifyWitness(w)));
          return lines;
        },
        py::arg("dim") = 16, py::arg("seed") = 0,
        "Verifies the four constructive pattern witnesses; one report line each.");
}
