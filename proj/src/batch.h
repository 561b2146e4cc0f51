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

// Batched scoring shared by training and evaluation. Work is split into
// fixed-size blocks so results never depend on the number of threads.

#ifndef TCE_SRC_BATCH_H_
#define TCE_SRC_BATCH_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tce/model.h"

namespace tce::internal {

inline constexpr std::size_t kRowBlock = 64;
inline constexpr std::size_t kEntityBlock = 256;

// Runs fn(task) for task in [0, num_tasks) on up to `threads` workers.
template <class Fn>
void ParallelFor(std::size_t num_tasks, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, num_tasks));
  if (threads == 1) {
    for (std::size_t t = 0; t < num_tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t t = next++; t < num_tasks; t = next++) fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = num_tasks;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline std::size_t NumBlocks(std::size_t n, std::size_t block) {
  return (n + block - 1) / block;
}

template <class Real>
using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Real>
Eigen::Map<const RowMatrix<Real>> EntityMatrix(const Model<Real>& model) {
  const auto& e = model.table(TableId::kEntity);
  return {e.data().data(), static_cast<Eigen::Index>(e.rows()),
          static_cast<Eigen::Index>(e.cols())};
}

// Transforms the head of every query; row i of `heads` is query i's vector.
template <class Real>
void TransformHeads(const Model<Real>& model, std::span<const Quadruple> queries,
                    std::vector<typename Model<Real>::Workspace>& workspaces,
                    RowMatrix<Real>& heads, std::size_t threads) {
  const std::size_t dim = model.shape().dim;
  workspaces.resize(queries.size());
  heads.resize(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(dim));
  ParallelFor(NumBlocks(queries.size(), kRowBlock), threads, [&](std::size_t b) {
    const std::size_t end = std::min(queries.size(), (b + 1) * kRowBlock);
    for (std::size_t i = b * kRowBlock; i < end; ++i) {
      const auto& q = queries[i];
      model.TransformHead(q.head, q.rel, q.time, workspaces[i]);
      std::copy(workspaces[i].head.begin(), workspaces[i].head.end(),
                heads.row(static_cast<Eigen::Index>(i)).data());
    }
  });
}

// scores(i, e) = score of candidate tail e for transformed head i.
template <class Real>
void ScoreMatrix(const Model<Real>& model, const RowMatrix<Real>& heads,
                 RowMatrix<double>& scores, std::size_t threads) {
  const auto n = static_cast<std::size_t>(heads.rows());
  const std::size_t num_entities = model.shape().num_entities;
  scores.resize(heads.rows(), static_cast<Eigen::Index>(num_entities));
  const auto entities = EntityMatrix(model);
  const bool similarity = model.options().score == ScoreKind::kSimilarity;
  ParallelFor(NumBlocks(n, kRowBlock), threads, [&](std::size_t b) {
    const auto begin = static_cast<Eigen::Index>(b * kRowBlock);
    const auto rows = static_cast<Eigen::Index>(std::min(n, (b + 1) * kRowBlock)) - begin;
    if (similarity) {
      RowMatrix<Real> block = heads.middleRows(begin, rows) * entities.transpose();
      scores.middleRows(begin, rows) = block.template cast<double>();
      return;
    }
    for (Eigen::Index i = begin; i < begin + rows; ++i) {
      const auto h = heads.row(i);
      model.ScoreAllTails(std::span<const Real>(h.data(), static_cast<std::size_t>(h.size())),
                          std::span<double>(scores.row(i).data(), num_entities));
    }
  });
}

}  // namespace tce::internal

#endif  // TCE_SRC_BATCH_H_
