// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NERPRUNE_CHECKPOINT_H_
#define NERPRUNE_CHECKPOINT_H_

#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "nerprune/prune.h"

namespace nerprune {

// On-disk layout of a directory checkpoint:
//
//   manifest.json      {"format": 1, "strategy": ..., "achieved_sparsity": ...,
//                       "tensors": [{"name", "shape", "role", "values",
//                                    "mask"}, ...], "extra": {...}}
//   <name>.f64         little-endian IEEE-754 doubles, row-major
//   <name>.mask        one byte (0 or 1) per element
//
// `extra` carries caller-defined metadata and is returned verbatim.
struct Checkpoint {
  std::vector<ParamTensor> params;
  PruneStrategy strategy = PruneStrategy::kPartial;
  double achieved_sparsity = 0.0;
  nlohmann::json extra = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& dir,
                     std::span<const ParamTensor> params,
                     PruneStrategy strategy,
                     const nlohmann::json& extra = nlohmann::json::object());

// Throws DataError on a missing or inconsistent checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace nerprune

#endif  // NERPRUNE_CHECKPOINT_H_
