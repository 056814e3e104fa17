// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// IOB2 corpora, entity-mention decoding and the per-language metadata table.

#ifndef NERPRUNE_CORPUS_H_
#define NERPRUNE_CORPUS_H_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nerprune/tags.h"

namespace nerprune {

enum class Split { kTrain, kDev, kTest };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view s);

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<Tag> tags;
  std::string language;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Half-open token span [start, end) with a type. `surface` is a copy of the
// covered tokens.
struct EntityMention {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType type = EntityType::kPer;
  std::vector<std::string> surface;

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

struct Corpus {
  std::string language;
  Split split = Split::kTest;
  std::vector<Sentence> sentences;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct ParseOptions {
  // Remove a leading "<language>:" from every token (WikiAnn/XTREME dumps).
  bool strip_prefix = false;
};

// Reads `token<TAB>tag` or `token<SPACE>tag` rows; blank lines separate
// sentences. Throws ParseError (bad row) or TagError (unknown tag), both
// carrying the 1-based line number.
Corpus parse_iob2(std::istream& in, std::string_view language, Split split,
                  const ParseOptions& options = {});
Corpus parse_iob2_string(std::string_view text, std::string_view language,
                         Split split, const ParseOptions& options = {});
Corpus read_iob2_file(const std::string& path, std::string_view language,
                      Split split, const ParseOptions& options = {});

// Tab-separated rows, one blank line after every sentence.
void write_iob2(std::ostream& out, const Corpus& corpus);
std::string to_iob2_string(const Corpus& corpus);

// Throws DataError if the sentence breaks a Sentence invariant.
void validate_sentence(const Sentence& sentence);

// Decodes mentions with seqeval's default (lenient) IOB2 rules: B-X always
// opens a mention; I-X continues an open X mention and otherwise opens a new
// one. Output is sorted by start and non-overlapping.
std::vector<EntityMention> extract_entities(const Sentence& sentence);

// Fraction of test mentions (with multiplicity) whose exact (type, surface)
// also occurs in the training corpus. nullopt when the test side has no
// mentions.
std::optional<double> entity_overlap(const Corpus& train, const Corpus& test);

struct LanguageMeta {
  std::string code;
  std::string script;
  std::string family;
  long train_size = 0;
  double pretrain_pct = 0.0;
};

using LanguageTable = std::map<std::string, LanguageMeta, std::less<>>;

// CSV `code,script,family,train_size,pretrain_pct`; the header row is
// optional. Rejects duplicate codes and non-numeric sizes.
LanguageTable load_language_metadata(std::istream& in);
LanguageTable load_language_metadata_file(const std::string& path);

// Looks up a code, throwing DataError when it is missing.
const LanguageMeta& lookup_language(const LanguageTable& table,
                                    std::string_view code);

}  // namespace nerprune

#endif  // NERPRUNE_CORPUS_H_
