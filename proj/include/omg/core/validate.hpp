#pragma once

#include <string>
#include <vector>

#include "omg/core/types.hpp"

namespace omg {

struct Violation {
  std::string field;
  std::string rule;

  std::string to_string() const { return field + ": " + rule; }
  bool operator==(const Violation&) const = default;
};

/// Checks every structural invariant of an instance. Never throws; an empty
/// result means the instance is well-formed.
std::vector<Violation> validate_instance(const NewsInstance& instance);

/// validate_instance over every record plus id uniqueness. Violation fields
/// are prefixed with the instance id.
std::vector<Violation> validate_dataset(const std::vector<NewsInstance>& instances);

inline constexpr int kRationaleMinWords = 100;

/// Judgment prompts ask for rationales of at least 100 words. Shorter ones
/// are flagged in reports but never rejected.
bool rationale_below_minimum(const Judgment& judgment);

}  // namespace omg
