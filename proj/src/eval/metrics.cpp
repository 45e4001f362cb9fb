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

#include "mrcq/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "mrcq/errors.hpp"

namespace mrcq {

namespace {

bool is_choice_label(std::string_view w) {
    return w.size() == 3 && w.front() == '(' && w.back() == ')' && std::isalnum(static_cast<unsigned char>(w[1]));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> words;
    std::istringstream in{std::string(s)};
    for (std::string w; in >> w;) words.push_back(w);
    return words;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

}  // namespace

std::vector<std::string> normalized_words(std::string_view text) {
    std::vector<std::string> out;
    for (const std::string& raw : split_ws(lower(text))) {
        if (is_choice_label(raw)) {
            out.push_back(raw);
            continue;
        }
        std::string cleaned = raw;
        for (char& c : cleaned) {
            if (std::ispunct(static_cast<unsigned char>(c))) c = ' ';
        }
        for (auto& w : split_ws(cleaned)) out.push_back(std::move(w));
    }
    return out;
}

std::string normalize_text(std::string_view text) { return join(normalized_words(text)); }

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double wer(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
    if (reference.empty()) throw ArgumentError("wer: empty reference");
    return static_cast<double>(edit_distance(reference, hypothesis)) / static_cast<double>(reference.size());
}

double wer(std::string_view reference, std::string_view hypothesis) {
    return wer(normalized_words(reference), normalized_words(hypothesis));
}

bool contains_words(std::string_view haystack, std::string_view needle) {
    const auto h = normalized_words(haystack);
    const auto n = normalized_words(needle);
    if (n.empty()) return false;
    return std::search(h.begin(), h.end(), n.begin(), n.end()) != h.end();
}

int accuracy_contain(std::string_view reference, std::string_view generated, bool yes_no) {
    if (!contains_words(generated, reference)) return 0;
    if (yes_no) {
        const std::string ref = normalize_text(reference);
        const char* opposite = ref == "yes" ? "no" : ref == "no" ? "yes" : nullptr;
        if (opposite && contains_words(generated, opposite)) return 0;
    }
    return 1;
}

int accuracy_mc(std::string_view reference, std::string_view generated) {
    return join(split_ws(lower(reference))) == join(split_ws(lower(generated))) ? 1 : 0;
}

double ocr_score(std::span<const std::string> references, std::string_view generated) {
    if (references.empty()) throw ArgumentError("ocr_score: empty reference list");
    int hits = 0;
    for (const auto& r : references) hits += contains_words(generated, r) ? 1 : 0;
    return std::min(1.0, hits / 3.0);
}

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::wer: return "wer";
        case Metric::accuracy_contain: return "accuracy_contain";
        case Metric::accuracy_mc: return "accuracy_mc";
        case Metric::ocr_score: return "ocr_score";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    for (Metric m : {Metric::wer, Metric::accuracy_contain, Metric::accuracy_mc, Metric::ocr_score}) {
        if (metric_name(m) == name) return m;
    }
    throw ArgumentError("unknown metric '" + std::string(name) + "'");
}

double ExactMatchJudge::score(std::string_view, std::string_view reference, std::string_view generated) const {
    return accuracy_mc(reference, generated);
}

}  // namespace mrcq
