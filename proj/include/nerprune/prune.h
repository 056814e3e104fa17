// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// Iterative magnitude pruning over a set of named tensors: sparsity
// schedules, global magnitude masks, mask application and accounting.

#ifndef NERPRUNE_PRUNE_H_
#define NERPRUNE_PRUNE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nerprune {

enum class TensorRole { kEmbedding, kDense, kExcluded };

std::string_view to_string(TensorRole role);
std::optional<TensorRole> parse_role(std::string_view s);

enum class PruneStrategy { kPartial, kInclEmbeddings };

// "partial", "incl-embeddings".
std::string_view to_string(PruneStrategy strategy);
std::optional<PruneStrategy> parse_strategy(std::string_view s);

bool is_prunable(TensorRole role, PruneStrategy strategy);

// A dense row-major tensor with a persistent binary mask. Values at masked
// positions are zero after apply_masks().
class ParamTensor {
 public:
  ParamTensor(std::string name, std::vector<std::size_t> shape,
              TensorRole role);
  ParamTensor(std::string name, std::vector<std::size_t> shape,
              TensorRole role, std::vector<double> values);

  const std::string& name() const { return name_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  TensorRole role() const { return role_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<std::uint8_t> mask() { return mask_; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  std::size_t masked_count() const;

 private:
  std::string name_;
  std::vector<std::size_t> shape_;
  TensorRole role_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

enum class RampShape { kCubic, kLinear };

struct PruneSchedule {
  long start_step = 0;
  long end_step = 0;
  long frequency = 1;
  double target_sparsity = 0.0;
  RampShape ramp = RampShape::kCubic;
};

// Throws ScheduleError if the schedule breaks an invariant.
void validate_schedule(const PruneSchedule& schedule);

struct PruneEvent {
  long step = 0;
  double sparsity = 0.0;
};

// Events at start, start+f, ..., end. Cubic ramp
// s(t) = S * (1 - (1 - (t - start) / (end - start))^3), reaching S at end.
std::vector<PruneEvent> schedule_events(const PruneSchedule& schedule);

enum class MaskScope { kGlobal, kPerTensor };

// Number of weights masked at sparsity s over n weights: floor(s * n). A
// 1e-9 nudge absorbs binary representation error of decimal fractions
// (0.29 * 100 must give 29).
std::size_t target_masked_count(double sparsity, std::size_t n);

// Grows the masks of the tensors that are prunable under `strategy` until
// floor(sparsity * N) of their N weights are masked. New positions are the
// smallest |value| among unmasked weights, ranked globally (or per tensor);
// ties go to the lexicographically smaller tensor name, then the smaller
// flat index. Masks never regrow: throws MonotonicityError when the
// requested level is below what is already masked. Does not touch values.
void compute_masks(std::span<ParamTensor> params, double sparsity,
                   PruneStrategy strategy, MaskScope scope = MaskScope::kGlobal);

// values *= mask, element-wise. Idempotent.
void apply_masks(std::span<ParamTensor> params);

// Masked fraction over the tensors prunable under `strategy`. Throws
// Error when no tensor is prunable.
double measure_sparsity(std::span<const ParamTensor> params,
                        PruneStrategy strategy);

// Total size of the tensors prunable under `strategy`.
std::size_t prunable_count(std::span<const ParamTensor> params,
                           PruneStrategy strategy);

}  // namespace nerprune

#endif  // NERPRUNE_PRUNE_H_
