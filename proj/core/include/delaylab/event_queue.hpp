#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace delaylab {

// Ordering among simultaneous events. Arrivals come first so that a packet
// arriving exactly on a slot boundary contends in that slot.
enum class EventKind : std::uint8_t {
  Arrival = 0,
  TransmissionEnd = 1,
  SlotBoundary = 2,
};

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  std::uint32_t node = 0;
};

// Min-heap on (time, kind, node).
class EventQueue {
 public:
  void push(const SimEvent& e) { heap_.push(e); }

  const SimEvent& top() const { return heap_.top(); }

  SimEvent pop() {
    SimEvent e = heap_.top();
    heap_.pop();
    return e;
  }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return a.kind > b.kind;
      return a.node > b.node;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

}  // namespace delaylab
