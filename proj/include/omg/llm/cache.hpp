#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace omg {

/// Content-addressed reply cache. With a directory, every entry is also a
/// `<digest>.json` record written atomically (temp file, then rename) and
/// entries from earlier runs are served.
class ReplyCache {
 public:
  explicit ReplyCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, const std::string& backend_id, const std::string& model_name,
           const std::string& reply);

  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> memory_;
};

}  // namespace omg
