#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "agentosi/error.hpp"

namespace agentosi {

// Discrete-event clock. Events run in (time, insertion order); the
// scheduler is the only thing that advances simulated time.
class Scheduler {
 public:
  using Task = std::function<void()>;

  std::int64_t now() const { return now_; }

  // Throws Errc::ClockRegression for times before now().
  void at(std::int64_t time_ms, Task task) {
    if (time_ms < now_) {
      throw Error(Errc::ClockRegression, "event scheduled in the past");
    }
    queue_.push(Event{time_ms, seq_++, std::move(task)});
  }
  void after(std::int64_t delay_ms, Task task) { at(now_ + delay_ms, std::move(task)); }

  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t executed() const { return executed_; }

  bool step() {
    if (queue_.empty()) return false;
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time_ms;
    ++executed_;
    ev.task();
    return true;
  }

  // Runs every event with time <= until_ms, then parks the clock there.
  void run_until(std::int64_t until_ms) {
    while (!queue_.empty() && queue_.top().time_ms <= until_ms) step();
    if (until_ms > now_) now_ = until_ms;
  }

  void run() {
    while (step()) {
    }
  }

 private:
  struct Event {
    std::int64_t time_ms;
    std::uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time_ms != b.time_ms ? a.time_ms > b.time_ms : a.seq > b.seq;
    }
  };

  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t executed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace agentosi
