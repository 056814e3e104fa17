// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// Hand-enumerated lenient IOB2 decoding cases, shared by unit and
// acceptance tests.

#ifndef NERPRUNE_TESTS_SUPPORT_FIXTURES_H_
#define NERPRUNE_TESTS_SUPPORT_FIXTURES_H_

#include <string_view>

namespace nerprune::testing {

struct LenientCase {
  std::string_view tags;      // space separated
  std::string_view mentions;  // "start:end:TYPE" space separated
};

inline constexpr LenientCase kLenientCases[] = {
    {"", ""},
    {"O O O", ""},
    {"B-PER", "0:1:PER"},
    {"I-PER", "0:1:PER"},
    {"B-PER I-PER O B-LOC", "0:2:PER 3:4:LOC"},
    {"O I-LOC I-LOC", "1:3:LOC"},
    {"B-PER B-PER", "0:1:PER 1:2:PER"},
    {"B-PER I-LOC", "0:1:PER 1:2:LOC"},
    {"I-PER I-LOC I-LOC", "0:1:PER 1:3:LOC"},
    {"B-ORG I-ORG I-ORG I-ORG", "0:4:ORG"},
    {"O B-LOC O I-LOC", "1:2:LOC 3:4:LOC"},
    {"I-ORG B-ORG I-ORG", "0:1:ORG 1:3:ORG"},
    {"B-LOC I-LOC B-LOC I-LOC", "0:2:LOC 2:4:LOC"},
    {"I-PER I-PER I-PER", "0:3:PER"},
    {"O O I-ORG", "2:3:ORG"},
    {"B-PER O O", "0:1:PER"},
    {"B-PER I-PER I-ORG I-PER", "0:2:PER 2:3:ORG 3:4:PER"},
    {"I-LOC O I-LOC O I-LOC", "0:1:LOC 2:3:LOC 4:5:LOC"},
    {"B-ORG I-PER I-PER O B-ORG", "0:1:ORG 1:3:PER 4:5:ORG"},
    {"O B-PER I-PER I-PER O B-LOC I-LOC O", "1:4:PER 5:7:LOC"},
    {"B-LOC B-ORG B-PER", "0:1:LOC 1:2:ORG 2:3:PER"},
    {"I-ORG I-ORG B-ORG", "0:2:ORG 2:3:ORG"},
    {"O I-PER B-LOC I-LOC I-LOC O I-ORG I-ORG", "1:2:PER 2:5:LOC 6:8:ORG"},
    {"B-PER I-LOC I-PER", "0:1:PER 1:2:LOC 2:3:PER"},
};

}  // namespace nerprune::testing

#endif  // NERPRUNE_TESTS_SUPPORT_FIXTURES_H_
