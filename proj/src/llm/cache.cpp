#include "omg/llm/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "omg/error.hpp"

namespace omg {

namespace fs = std::filesystem;

ReplyCache::ReplyCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    fs::create_directories(*dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create cache directory " + dir_->string());
  }
}

std::optional<std::string> ReplyCache::get(const std::string& key) {
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.contains("reply") || !j["reply"].is_string() || j.value("key", "") != key) {
    return std::nullopt;
  }
  auto reply = j["reply"].get<std::string>();
  std::lock_guard lock(mu_);
  memory_.emplace(key, reply);
  return reply;
}

void ReplyCache::put(const std::string& key, const std::string& backend_id, const std::string& model_name,
                     const std::string& reply) {
  {
    std::lock_guard lock(mu_);
    memory_[key] = reply;
  }
  if (!dir_) return;

  static std::atomic<unsigned> counter{0};
  nlohmann::json record{{"key", key}, {"backend_id", backend_id}, {"model_name", model_name}, {"reply", reply}};
  std::ostringstream tmp_name;
  tmp_name << key << ".json.tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
           << counter.fetch_add(1);
  auto tmp = *dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write cache entry " + tmp.string());
    out << record.dump(2) << '\n';
  }
  std::error_code ec;
  fs::rename(tmp, *dir_ / (key + ".json"), ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot publish cache entry " + key);
  }
}

std::size_t ReplyCache::size() const {
  std::lock_guard lock(mu_);
  return memory_.size();
}

}  // namespace omg
