#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace omg {

/// Blocking token bucket. A non-positive rate means unlimited.
class TokenBucket {
 public:
  TokenBucket(double tokens_per_second, int burst);

  void acquire();
  std::chrono::nanoseconds time_until_available();

 private:
  void refill(std::chrono::steady_clock::time_point now);

  double rate_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

/// Caps concurrent in-flight requests.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit);

  void acquire();
  void release();

  class Slot {
   public:
    explicit Slot(InFlightLimiter& l) : l_(l) { l_.acquire(); }
    ~Slot() { l_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& l_;
  };

  int peak() const;

 private:
  int limit_;
  int active_ = 0;
  int peak_ = 0;
  mutable std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace omg
