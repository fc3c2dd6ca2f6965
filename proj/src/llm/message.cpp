#include "omg/llm/message.hpp"

#include "omg/llm/digest.hpp"

namespace omg {

std::string ImageBlob::digest() const {
  if (!bytes.empty()) return sha256_hex(std::span<const std::uint8_t>(bytes));
  return sha256_hex("ref:" + ref);
}

std::string sniff_image_mime(const std::vector<std::uint8_t>& b) {
  auto starts = [&](std::initializer_list<std::uint8_t> sig) {
    if (b.size() < sig.size()) return false;
    std::size_t i = 0;
    for (auto s : sig) {
      if (b[i++] != s) return false;
    }
    return true;
  };
  if (starts({0x89, 'P', 'N', 'G'})) return "image/png";
  if (starts({0xFF, 0xD8, 0xFF})) return "image/jpeg";
  if (starts({'G', 'I', 'F', '8'})) return "image/gif";
  if (b.size() >= 12 && starts({'R', 'I', 'F', 'F'}) && b[8] == 'W' && b[9] == 'E' && b[10] == 'B' &&
      b[11] == 'P') {
    return "image/webp";
  }
  return "application/octet-stream";
}

std::string all_text(const std::vector<Message>& messages) {
  std::string out;
  for (const auto& m : messages) {
    for (const auto& p : m.parts) {
      if (p.kind != ContentPart::Kind::Text) continue;
      if (!out.empty()) out += "\n\n";
      out += p.text;
    }
  }
  return out;
}

bool has_image_part(const std::vector<Message>& messages) {
  for (const auto& m : messages) {
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::Image) return true;
    }
  }
  return false;
}

}  // namespace omg
