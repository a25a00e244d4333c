#pragma once

#include <atomic>
#include <cstdint>
#include <functional>

namespace poa {

// Unix seconds. Every component takes time through a Clock so tests and
// the --now flag never depend on wall time.
using Clock = std::function<int64_t()>;

Clock wall_clock();

class ManualClock {
 public:
  explicit ManualClock(int64_t start) : now_(start) {}

  int64_t now() const { return now_.load(); }
  void set(int64_t t) { now_.store(t); }
  void advance(int64_t dt) { now_.fetch_add(dt); }

  Clock as_clock() {
    return [this] { return now_.load(); };
  }

 private:
  std::atomic<int64_t> now_;
};

}  // namespace poa
