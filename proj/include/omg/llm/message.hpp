#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace omg {

/// Image attached to a prompt. `bytes` may be empty when only a reference
/// is known (offline mock runs, or a remote URL the backend fetches itself).
struct ImageBlob {
  std::vector<std::uint8_t> bytes;
  std::string mime_type = "image/jpeg";
  std::string ref;

  /// sha256 of the bytes, or of the reference when no bytes are present.
  std::string digest() const;
};

std::string sniff_image_mime(const std::vector<std::uint8_t>& bytes);

struct ContentPart {
  enum class Kind { Text, Image };
  Kind kind = Kind::Text;
  std::string text;
  std::shared_ptr<const ImageBlob> image;

  static ContentPart make_text(std::string t) { return {Kind::Text, std::move(t), nullptr}; }
  static ContentPart make_image(std::shared_ptr<const ImageBlob> img) {
    return {Kind::Image, {}, std::move(img)};
  }
};

struct Message {
  std::string role;  // "system", "user" or "assistant"
  std::vector<ContentPart> parts;
};

/// Concatenation of all text parts, one message per paragraph.
std::string all_text(const std::vector<Message>& messages);
bool has_image_part(const std::vector<Message>& messages);

}  // namespace omg
