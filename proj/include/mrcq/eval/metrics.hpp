// Copyright 2026 The MRCQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mrcq {

// Recorded in every report so scores stay comparable across versions.
inline constexpr std::string_view kNormalizationVersion = "norm-v1";

// Lowercase, punctuation to spaces (a bare choice label such as "(b)" is
// kept whole), whitespace collapsed.
std::string normalize_text(std::string_view text);
std::vector<std::string> normalized_words(std::string_view text);

// Word-level Levenshtein distance with unit costs.
std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);
// (S + I + D) / |reference|. Can exceed 1. Empty reference: ArgumentError.
double wer(std::span<const std::string> reference, std::span<const std::string> hypothesis);
double wer(std::string_view reference, std::string_view hypothesis);

// True when the words of `needle` occur contiguously in `haystack`, both
// normalised, so matches respect word boundaries.
bool contains_words(std::string_view haystack, std::string_view needle);

// 1 when the reference occurs in the generation; for yes/no questions the
// opposite answer must also be absent.
int accuracy_contain(std::string_view reference, std::string_view generated, bool yes_no);

// 1 when trimmed, case-folded, whitespace-collapsed strings are equal.
int accuracy_mc(std::string_view reference, std::string_view generated);

// min(1, hits / 3), hits = references contained in the generation.
double ocr_score(std::span<const std::string> references, std::string_view generated);

enum class Metric { wer, accuracy_contain, accuracy_mc, ocr_score };
std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

// Scores a free-form answer; the shipped implementation is exact match.
class Judge {
public:
    virtual ~Judge() = default;
    virtual double score(std::string_view question, std::string_view reference, std::string_view generated) const = 0;
};

class ExactMatchJudge : public Judge {
public:
    double score(std::string_view question, std::string_view reference, std::string_view generated) const override;
};

}  // namespace mrcq
