// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/perturb.h"

#include <algorithm>
#include <set>
#include <utility>

#include "json.hpp"
#include "nerprune/errors.h"

namespace nerprune {

std::string_view to_string(PerturbationScope scope) {
  switch (scope) {
    case PerturbationScope::kInLanguage:
      return "in-language";
    case PerturbationScope::kInScript:
      return "in-script";
    case PerturbationScope::kInFamily:
      return "in-family";
  }
  return "?";
}

std::optional<PerturbationScope> parse_scope(std::string_view s) {
  for (PerturbationScope scope : kPerturbationScopes) {
    if (to_string(scope) == s) return scope;
  }
  return std::nullopt;
}

std::string group_key_for(const LanguageTable& meta, std::string_view language,
                          PerturbationScope scope) {
  switch (scope) {
    case PerturbationScope::kInLanguage:
      return std::string(language);
    case PerturbationScope::kInScript:
      return lookup_language(meta, language).script;
    case PerturbationScope::kInFamily:
      return lookup_language(meta, language).family;
  }
  return {};
}

const std::vector<Surface>& EntityPool::candidates(EntityType type) const {
  static const std::vector<Surface> kEmpty;
  auto it = by_type.find(type);
  return it == by_type.end() ? kEmpty : it->second;
}

EntityPool build_pool(std::span<const Corpus> corpora, const LanguageTable& meta,
                      PerturbationScope scope, std::string_view group_key) {
  EntityPool pool;
  pool.scope = scope;
  pool.group_key = std::string(group_key);

  std::map<EntityType, std::set<Surface>> seen;
  std::size_t members = 0;
  for (const Corpus& corpus : corpora) {
    if (group_key_for(meta, corpus.language, scope) != group_key) continue;
    ++members;
    for (const Sentence& s : corpus.sentences) {
      for (EntityMention& m : extract_entities(s)) {
        if (seen[m.type].insert(m.surface).second) {
          pool.by_type[m.type].push_back(std::move(m.surface));
        }
      }
    }
  }
  if (members == 0) {
    throw DataError("no corpus belongs to " + std::string(to_string(scope)) +
                    " group '" + std::string(group_key) + "'");
  }
  return pool;
}

PerturbedSentence perturb_sentence(const Sentence& sentence,
                                   const EntityPool& pool, Rng& rng,
                                   std::size_t sentence_index) {
  PerturbedSentence out;
  out.sentence.language = sentence.language;
  std::size_t cursor = 0;

  auto copy_through = [&](std::size_t end) {
    for (; cursor < end; ++cursor) {
      out.sentence.tokens.push_back(sentence.tokens[cursor]);
      out.sentence.tags.push_back(sentence.tags[cursor]);
    }
  };

  for (const EntityMention& m : extract_entities(sentence)) {
    copy_through(m.start);
    ReplacementRecord rec;
    rec.sentence_index = sentence_index;
    rec.start = m.start;
    rec.end = m.end;
    rec.original = m.surface;
    rec.type = m.type;

    std::vector<const Surface*> options;
    for (const Surface& s : pool.candidates(m.type)) {
      if (s != m.surface) options.push_back(&s);
    }
    if (options.empty()) {
      rec.replacement = m.surface;
    } else {
      rec.draw_index = rng.draws();
      rec.replacement = *options[rng.uniform_index(options.size())];
      rec.replaced = true;
    }
    // Strict B/I retagging, so adjacent mentions never merge.
    for (std::size_t i = 0; i < rec.replacement.size(); ++i) {
      out.sentence.tokens.push_back(rec.replacement[i]);
      out.sentence.tags.push_back(i == 0 ? Tag::begin(m.type)
                                         : Tag::inside(m.type));
    }
    cursor = m.end;
    out.log.push_back(std::move(rec));
  }
  copy_through(sentence.size());
  return out;
}

PerturbedCorpus perturb_corpus(const Corpus& corpus, const EntityPool& pool,
                               std::uint64_t seed) {
  PerturbedCorpus out;
  out.corpus.language = corpus.language;
  out.corpus.split = corpus.split;
  out.corpus.sentences.reserve(corpus.sentences.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    PerturbedSentence p = perturb_sentence(corpus.sentences[i], pool, rng, i);
    out.corpus.sentences.push_back(std::move(p.sentence));
    std::move(p.log.begin(), p.log.end(), std::back_inserter(out.log));
  }
  return out;
}

void write_replacement_log(std::ostream& out, const ReplacementLog& log) {
  for (const ReplacementRecord& r : log) {
    nlohmann::ordered_json j;
    j["sentence_index"] = r.sentence_index;
    j["start"] = r.start;
    j["end"] = r.end;
    j["original"] = r.original;
    j["replacement"] = r.replacement;
    j["etype"] = to_string(r.type);
    j["draw_index"] = r.draw_index ? nlohmann::ordered_json(*r.draw_index)
                                   : nlohmann::ordered_json(nullptr);
    j["replaced"] = r.replaced;
    out << j.dump() << '\n';
  }
}

}  // namespace nerprune
