// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// Entity mention replacement: every mention in a test sentence is swapped for
// another surface of the same type drawn from a language-, script- or
// family-scoped pool.

#ifndef NERPRUNE_PERTURB_H_
#define NERPRUNE_PERTURB_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nerprune/corpus.h"
#include "nerprune/rng.h"

namespace nerprune {

enum class PerturbationScope { kInLanguage, kInScript, kInFamily };

inline constexpr PerturbationScope kPerturbationScopes[] = {
    PerturbationScope::kInLanguage, PerturbationScope::kInScript,
    PerturbationScope::kInFamily};

// "in-language", "in-script", "in-family".
std::string_view to_string(PerturbationScope scope);
std::optional<PerturbationScope> parse_scope(std::string_view s);

// The group a language belongs to under a scope: its code, script or family.
std::string group_key_for(const LanguageTable& meta, std::string_view language,
                          PerturbationScope scope);

using Surface = std::vector<std::string>;

struct EntityPool {
  PerturbationScope scope = PerturbationScope::kInLanguage;
  std::string group_key;
  // Deduplicated, in first-seen order.
  std::map<EntityType, std::vector<Surface>> by_type;

  const std::vector<Surface>& candidates(EntityType type) const;
};

struct ReplacementRecord {
  std::size_t sentence_index = 0;
  std::size_t start = 0;  // original span
  std::size_t end = 0;
  Surface original;
  Surface replacement;  // equals original when !replaced
  EntityType type = EntityType::kPer;
  // Position of the draw in the corpus rng stream; absent on fallback.
  std::optional<std::uint64_t> draw_index;
  bool replaced = false;

  friend bool operator==(const ReplacementRecord&,
                         const ReplacementRecord&) = default;
};

using ReplacementLog = std::vector<ReplacementRecord>;

// Pools every mention of every corpus whose language falls in `group_key`
// under `scope`. Throws DataError when no corpus belongs to the group or a
// needed language has no metadata.
EntityPool build_pool(std::span<const Corpus> corpora, const LanguageTable& meta,
                      PerturbationScope scope, std::string_view group_key);

struct PerturbedSentence {
  Sentence sentence;
  ReplacementLog log;
};

// Replaces mentions left to right. A mention whose pool has no surface other
// than its own is kept and logged with replaced=false.
PerturbedSentence perturb_sentence(const Sentence& sentence,
                                   const EntityPool& pool, Rng& rng,
                                   std::size_t sentence_index = 0);

struct PerturbedCorpus {
  Corpus corpus;
  ReplacementLog log;
};

// One rng stream seeded with `seed`, consumed in sentence then mention order.
PerturbedCorpus perturb_corpus(const Corpus& corpus, const EntityPool& pool,
                               std::uint64_t seed);

// JSON-lines, one record per line.
void write_replacement_log(std::ostream& out, const ReplacementLog& log);

}  // namespace nerprune

#endif  // NERPRUNE_PERTURB_H_
