# Copyright 2026 The TCompoundE Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""TCompoundE temporal knowledge graph embeddings."""

from ._tcompounde import (
    Dataset,
    DataError,
    IoError,
    Model,
    Quadruple,
    TrainConfig,
    TrainError,
    check_patterns,
    evaluate,
    load_checkpoint,
    load_dataset,
    make_synthetic,
    save_dataset_cache,
    train,
    variants,
)

__all__ = [
    "Dataset",
    "DataError",
    "IoError",
    "Model",
    "Quadruple",
    "TrainConfig",
    "TrainError",
    "check_patterns",
    "evaluate",
    "load_checkpoint",
    "load_dataset",
    "make_synthetic",
    "save_dataset_cache",
    "train",
    "variants",
]
