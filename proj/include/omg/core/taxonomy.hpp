#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace omg {

/// High-impact topic categories used for stratified sampling.
inline constexpr std::array<std::string_view, 10> kTopicTaxonomy = {
    "world",     "international_relations", "politics_elections", "politics",
    "law_crime", "business_economy",        "environment",        "science_technology",
    "technology", "conflict_attack",
};

inline constexpr std::string_view kOtherTopic = "other";

/// Generic news frames.
inline constexpr std::array<std::string_view, 15> kFrameTaxonomy = {
    "Economic",         "Capacity and Resources", "Morality",        "Fairness and Equality",
    "Legality",         "Policy",                 "Crime and Punishment", "Security and Defense",
    "Health and Safety", "Quality of Life",       "Cultural Identity", "Public Opinion",
    "Political",        "External Regulation",    "Other",
};

bool is_taxonomy_topic(std::string_view topic);

/// Taxonomy topic or "other".
bool is_recognized_topic(std::string_view topic);

/// Canonical frame spelling for a case-insensitive, trimmed match.
std::optional<std::string> canonical_frame(std::string_view tag);

/// Frame list rendered the way the frame-identification prompt expects it.
std::string frame_taxonomy_listing();

}  // namespace omg
