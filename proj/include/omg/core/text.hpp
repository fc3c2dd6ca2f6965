#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace omg::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Maximal runs of non-whitespace characters.
std::vector<std::string_view> split_whitespace(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

}  // namespace omg::text
