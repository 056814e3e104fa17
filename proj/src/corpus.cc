// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/corpus.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "nerprune/errors.h"

namespace nerprune {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  const char sep = line.find('\t') != std::string_view::npos ? '\t' : ' ';
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return fields;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

Corpus parse_iob2(std::istream& in, std::string_view language, Split split,
                  const ParseOptions& options) {
  Corpus corpus;
  corpus.language = std::string(language);
  corpus.split = split;

  const std::string prefix = std::string(language) + ":";
  Sentence current;
  current.language = corpus.language;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    current.language = corpus.language;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) {
      flush();
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected 2 fields (token, tag), found " +
                                    std::to_string(fields.size()));
    }
    std::string_view token = fields[0];
    if (options.strip_prefix && token.starts_with(prefix) &&
        token.size() > prefix.size()) {
      token.remove_prefix(prefix.size());
    }
    if (token.empty()) throw ParseError(line_no, "empty token");
    auto tag = Tag::parse(fields[1]);
    if (!tag) {
      throw TagError(line_no, "unknown tag '" + std::string(fields[1]) + "'");
    }
    current.tokens.emplace_back(token);
    current.tags.push_back(*tag);
  }
  flush();
  return corpus;
}

Corpus parse_iob2_string(std::string_view text, std::string_view language,
                         Split split, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_iob2(in, language, split, options);
}

Corpus read_iob2_file(const std::string& path, std::string_view language,
                      Split split, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path);
  try {
    return parse_iob2(in, language, split, options);
  } catch (const TagError& e) {
    throw TagError(e.line(), path + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

void write_iob2(std::ostream& out, const Corpus& corpus) {
  for (const Sentence& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i] << '\t' << s.tags[i].str() << '\n';
    }
    out << '\n';
  }
}

std::string to_iob2_string(const Corpus& corpus) {
  std::ostringstream out;
  write_iob2(out, corpus);
  return out.str();
}

void validate_sentence(const Sentence& sentence) {
  if (sentence.tokens.size() != sentence.tags.size()) {
    throw DataError("sentence has " + std::to_string(sentence.tokens.size()) +
                    " tokens but " + std::to_string(sentence.tags.size()) +
                    " tags");
  }
  for (const std::string& t : sentence.tokens) {
    if (t.empty()) throw DataError("empty token");
    if (t.find_first_of("\r\n") != std::string::npos) {
      throw DataError("token contains a line break");
    }
  }
}

std::vector<EntityMention> extract_entities(const Sentence& sentence) {
  std::vector<EntityMention> mentions;
  bool open = false;
  std::size_t start = 0;
  EntityType type = EntityType::kPer;

  auto close = [&](std::size_t end) {
    if (!open) return;
    EntityMention m;
    m.start = start;
    m.end = end;
    m.type = type;
    m.surface.assign(sentence.tokens.begin() + start,
                     sentence.tokens.begin() + end);
    mentions.push_back(std::move(m));
    open = false;
  };

  for (std::size_t i = 0; i < sentence.tags.size(); ++i) {
    const Tag tag = sentence.tags[i];
    if (tag.is_outside()) {
      close(i);
    } else if (tag.is_begin() || !open || type != tag.type()) {
      close(i);
      open = true;
      start = i;
      type = tag.type();
    }
  }
  close(sentence.tags.size());
  return mentions;
}

std::optional<double> entity_overlap(const Corpus& train, const Corpus& test) {
  std::set<std::pair<EntityType, std::vector<std::string>>> seen;
  for (const Sentence& s : train.sentences) {
    for (EntityMention& m : extract_entities(s)) {
      seen.emplace(m.type, std::move(m.surface));
    }
  }
  std::size_t total = 0;
  std::size_t hits = 0;
  for (const Sentence& s : test.sentences) {
    for (EntityMention& m : extract_entities(s)) {
      ++total;
      if (seen.contains({m.type, m.surface})) ++hits;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

LanguageTable load_language_metadata(std::istream& in) {
  LanguageTable table;
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "code,script,family,train_size,pretrain_pct") continue;
    }
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
      std::size_t next = line.find(',', pos);
      fields.push_back(trim(line.substr(pos, next - pos)));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 metadata fields, found " +
                                    std::to_string(fields.size()));
    }
    LanguageMeta meta;
    meta.code = std::string(fields[0]);
    meta.script = std::string(fields[1]);
    meta.family = std::string(fields[2]);
    if (meta.code.empty()) throw ParseError(line_no, "empty language code");

    auto [size_end, size_ec] = std::from_chars(
        fields[3].data(), fields[3].data() + fields[3].size(), meta.train_size);
    if (size_ec != std::errc() ||
        size_end != fields[3].data() + fields[3].size() || meta.train_size < 0) {
      throw ParseError(line_no, "non-numeric train_size '" +
                                    std::string(fields[3]) + "'");
    }
    auto [pct_end, pct_ec] = std::from_chars(
        fields[4].data(), fields[4].data() + fields[4].size(),
        meta.pretrain_pct);
    if (pct_ec != std::errc() ||
        pct_end != fields[4].data() + fields[4].size() ||
        meta.pretrain_pct < 0) {
      throw ParseError(line_no, "invalid pretrain_pct '" +
                                    std::string(fields[4]) + "'");
    }
    if (table.contains(meta.code)) {
      throw ParseError(line_no, "duplicate language code '" + meta.code + "'");
    }
    table.emplace(meta.code, std::move(meta));
  }
  return table;
}

LanguageTable load_language_metadata_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open metadata file " + path);
  return load_language_metadata(in);
}

const LanguageMeta& lookup_language(const LanguageTable& table,
                                    std::string_view code) {
  auto it = table.find(code);
  if (it == table.end()) {
    throw DataError("language '" + std::string(code) + "' has no metadata");
  }
  return it->second;
}

}  // namespace nerprune
