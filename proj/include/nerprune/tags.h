// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NERPRUNE_TAGS_H_
#define NERPRUNE_TAGS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace nerprune {

enum class EntityType : std::uint8_t { kPer = 0, kLoc = 1, kOrg = 2 };

inline constexpr std::array<EntityType, 3> kEntityTypes = {
    EntityType::kPer, EntityType::kLoc, EntityType::kOrg};

std::string_view to_string(EntityType type);
std::optional<EntityType> parse_entity_type(std::string_view s);

// One IOB2 tag. The index doubles as the tagger's output class, in the fixed
// order O, B-PER, I-PER, B-LOC, I-LOC, B-ORG, I-ORG.
class Tag {
 public:
  static constexpr int kCount = 7;

  constexpr Tag() = default;

  static constexpr Tag outside() { return Tag(0); }
  static constexpr Tag begin(EntityType t) {
    return Tag(1 + 2 * static_cast<int>(t));
  }
  static constexpr Tag inside(EntityType t) {
    return Tag(2 + 2 * static_cast<int>(t));
  }
  static std::optional<Tag> from_index(int index);
  static std::optional<Tag> parse(std::string_view s);

  constexpr int index() const { return index_; }
  constexpr bool is_outside() const { return index_ == 0; }
  constexpr bool is_begin() const { return index_ != 0 && index_ % 2 == 1; }
  constexpr bool is_inside() const { return index_ != 0 && index_ % 2 == 0; }
  // Only meaningful when !is_outside().
  constexpr EntityType type() const {
    return static_cast<EntityType>((index_ - 1) / 2);
  }

  std::string_view str() const;

  friend constexpr bool operator==(Tag, Tag) = default;

 private:
  explicit constexpr Tag(int index) : index_(static_cast<std::uint8_t>(index)) {}

  std::uint8_t index_ = 0;
};

}  // namespace nerprune

#endif  // NERPRUNE_TAGS_H_
