// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/prune.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <tuple>

#include "nerprune/errors.h"

namespace nerprune {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

struct Candidate {
  double magnitude;
  std::size_t tensor;  // rank of the tensor name
  std::size_t index;

  bool operator<(const Candidate& o) const {
    return std::tie(magnitude, tensor, index) <
           std::tie(o.magnitude, o.tensor, o.index);
  }
};

// Masks the `count` smallest unmasked entries across `tensors`, which must
// be sorted by name.
void mask_smallest(std::span<ParamTensor* const> tensors, std::size_t count) {
  if (count == 0) return;
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto values = tensors[t]->values();
    auto mask = tensors[t]->mask();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (mask[i]) candidates.push_back({std::fabs(values[i]), t, i});
    }
  }
  count = std::min(count, candidates.size());
  std::nth_element(candidates.begin(), candidates.begin() + (count - 1),
                   candidates.end());
  for (std::size_t k = 0; k < count; ++k) {
    tensors[candidates[k].tensor]->mask()[candidates[k].index] = 0;
  }
}

}  // namespace

std::string_view to_string(TensorRole role) {
  switch (role) {
    case TensorRole::kEmbedding:
      return "embedding";
    case TensorRole::kDense:
      return "dense";
    case TensorRole::kExcluded:
      return "excluded";
  }
  return "?";
}

std::optional<TensorRole> parse_role(std::string_view s) {
  if (s == "embedding") return TensorRole::kEmbedding;
  if (s == "dense") return TensorRole::kDense;
  if (s == "excluded") return TensorRole::kExcluded;
  return std::nullopt;
}

std::string_view to_string(PruneStrategy strategy) {
  return strategy == PruneStrategy::kPartial ? "partial" : "incl-embeddings";
}

std::optional<PruneStrategy> parse_strategy(std::string_view s) {
  if (s == "partial") return PruneStrategy::kPartial;
  if (s == "incl-embeddings") return PruneStrategy::kInclEmbeddings;
  return std::nullopt;
}

bool is_prunable(TensorRole role, PruneStrategy strategy) {
  switch (role) {
    case TensorRole::kDense:
      return true;
    case TensorRole::kEmbedding:
      return strategy == PruneStrategy::kInclEmbeddings;
    case TensorRole::kExcluded:
      return false;
  }
  return false;
}

ParamTensor::ParamTensor(std::string name, std::vector<std::size_t> shape,
                         TensorRole role)
    : ParamTensor(std::move(name), shape, role,
                  std::vector<double>(product(shape), 0.0)) {}

ParamTensor::ParamTensor(std::string name, std::vector<std::size_t> shape,
                         TensorRole role, std::vector<double> values)
    : name_(std::move(name)),
      shape_(std::move(shape)),
      role_(role),
      values_(std::move(values)),
      mask_(values_.size(), 1) {
  if (values_.size() != product(shape_)) {
    throw Error("tensor '" + name_ + "': " + std::to_string(values_.size()) +
                " values do not match its shape");
  }
}

std::size_t ParamTensor::masked_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 0));
}

void validate_schedule(const PruneSchedule& s) {
  if (s.start_step < 0) throw ScheduleError("schedule start_step is negative");
  if (s.start_step > s.end_step) {
    throw ScheduleError("schedule start_step exceeds end_step");
  }
  if (s.frequency < 1) throw ScheduleError("schedule frequency must be >= 1");
  if ((s.end_step - s.start_step) % s.frequency != 0) {
    throw ScheduleError(
        "schedule (end_step - start_step) is not a multiple of frequency");
  }
  if (!(s.target_sparsity >= 0.0) || s.target_sparsity >= 1.0) {
    throw ScheduleError("target sparsity must lie in [0, 1)");
  }
}

std::vector<PruneEvent> schedule_events(const PruneSchedule& s) {
  validate_schedule(s);
  std::vector<PruneEvent> events;
  const long span = s.end_step - s.start_step;
  for (long t = s.start_step; t <= s.end_step; t += s.frequency) {
    double sparsity = s.target_sparsity;
    if (t != s.end_step) {
      double progress = static_cast<double>(t - s.start_step) / span;
      double remaining = 1.0 - progress;
      sparsity = s.ramp == RampShape::kCubic
                     ? s.target_sparsity * (1.0 - remaining * remaining * remaining)
                     : s.target_sparsity * progress;
    }
    events.push_back({t, sparsity});
  }
  return events;
}

std::size_t target_masked_count(double sparsity, std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(sparsity * static_cast<double>(n) + 1e-9));
}

void compute_masks(std::span<ParamTensor> params, double sparsity,
                   PruneStrategy strategy, MaskScope scope) {
  if (!(sparsity >= 0.0) || sparsity > 1.0) {
    throw Error("sparsity must lie in [0, 1]");
  }
  std::vector<ParamTensor*> prunable;
  for (ParamTensor& p : params) {
    if (is_prunable(p.role(), strategy)) prunable.push_back(&p);
  }
  std::sort(prunable.begin(), prunable.end(),
            [](const ParamTensor* a, const ParamTensor* b) {
              return a->name() < b->name();
            });

  if (scope == MaskScope::kPerTensor) {
    for (ParamTensor* p : prunable) {
      std::size_t target = target_masked_count(sparsity, p->size());
      std::size_t masked = p->masked_count();
      if (target < masked) {
        throw MonotonicityError("tensor '" + p->name() + "' already has " +
                                std::to_string(masked) +
                                " masked weights, more than requested");
      }
      ParamTensor* one[] = {p};
      mask_smallest(one, target - masked);
    }
    return;
  }

  std::size_t total = 0;
  std::size_t masked = 0;
  for (const ParamTensor* p : prunable) {
    total += p->size();
    masked += p->masked_count();
  }
  std::size_t target = target_masked_count(sparsity, total);
  if (target < masked) {
    throw MonotonicityError(
        "requested sparsity " + std::to_string(sparsity) + " masks " +
        std::to_string(target) + " weights but " + std::to_string(masked) +
        " are already masked");
  }
  mask_smallest(prunable, target - masked);
}

void apply_masks(std::span<ParamTensor> params) {
  for (ParamTensor& p : params) {
    auto values = p.values();
    auto mask = p.mask();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!mask[i]) values[i] = 0.0;
    }
  }
}

std::size_t prunable_count(std::span<const ParamTensor> params,
                           PruneStrategy strategy) {
  std::size_t n = 0;
  for (const ParamTensor& p : params) {
    if (is_prunable(p.role(), strategy)) n += p.size();
  }
  return n;
}

double measure_sparsity(std::span<const ParamTensor> params,
                        PruneStrategy strategy) {
  std::size_t n = 0;
  std::size_t zeros = 0;
  for (const ParamTensor& p : params) {
    if (!is_prunable(p.role(), strategy)) continue;
    n += p.size();
    zeros += p.masked_count();
  }
  if (n == 0) throw Error("no prunable weights under strategy " +
                          std::string(to_string(strategy)));
  return static_cast<double>(zeros) / static_cast<double>(n);
}

}  // namespace nerprune
