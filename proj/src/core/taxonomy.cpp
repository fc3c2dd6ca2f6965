#include "omg/core/taxonomy.hpp"

#include <algorithm>

#include "omg/core/text.hpp"

namespace omg {

bool is_taxonomy_topic(std::string_view topic) {
  return std::find(kTopicTaxonomy.begin(), kTopicTaxonomy.end(), topic) != kTopicTaxonomy.end();
}

bool is_recognized_topic(std::string_view topic) {
  return topic == kOtherTopic || is_taxonomy_topic(topic);
}

std::optional<std::string> canonical_frame(std::string_view tag) {
  auto t = text::trim(tag);
  for (auto frame : kFrameTaxonomy) {
    if (text::iequals(t, frame)) return std::string(frame);
  }
  return std::nullopt;
}

std::string frame_taxonomy_listing() {
  std::string out = "[";
  for (std::size_t i = 0; i < kFrameTaxonomy.size(); ++i) {
    if (i) out += ", ";
    out += '"';
    out += kFrameTaxonomy[i];
    out += '"';
  }
  out += "]";
  return out;
}

}  // namespace omg
