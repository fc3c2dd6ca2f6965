#include "omg/llm/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace omg {

TokenBucket::TokenBucket(double tokens_per_second, int burst)
    : rate_(tokens_per_second),
      capacity_(std::max(1, burst)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::refill(std::chrono::steady_clock::time_point now) {
  std::chrono::duration<double> elapsed = now - last_;
  tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_);
  last_ = now;
}

std::chrono::nanoseconds TokenBucket::time_until_available() {
  if (rate_ <= 0) return std::chrono::nanoseconds(0);
  std::lock_guard lock(mu_);
  refill(std::chrono::steady_clock::now());
  if (tokens_ >= 1.0) return std::chrono::nanoseconds(0);
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::duration<double>((1.0 - tokens_) / rate_));
}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  while (true) {
    std::chrono::nanoseconds wait{0};
    {
      std::lock_guard lock(mu_);
      refill(std::chrono::steady_clock::now());
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double>((1.0 - tokens_) / rate_));
    }
    std::this_thread::sleep_for(wait);
  }
}

InFlightLimiter::InFlightLimiter(int limit) : limit_(std::max(1, limit)) {}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return active_ < limit_; });
  ++active_;
  peak_ = std::max(peak_, active_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --active_;
  }
  cv_.notify_one();
}

int InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

}  // namespace omg
