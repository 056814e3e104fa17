// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/tags.h"

namespace nerprune {
namespace {

constexpr std::array<std::string_view, Tag::kCount> kTagNames = {
    "O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG"};

}  // namespace

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::kPer:
      return "PER";
    case EntityType::kLoc:
      return "LOC";
    case EntityType::kOrg:
      return "ORG";
  }
  return "?";
}

std::optional<EntityType> parse_entity_type(std::string_view s) {
  for (EntityType t : kEntityTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<Tag> Tag::from_index(int index) {
  if (index < 0 || index >= kCount) return std::nullopt;
  return Tag(index);
}

std::optional<Tag> Tag::parse(std::string_view s) {
  for (int i = 0; i < kCount; ++i) {
    if (kTagNames[i] == s) return Tag(i);
  }
  return std::nullopt;
}

std::string_view Tag::str() const { return kTagNames[index_]; }

}  // namespace nerprune
