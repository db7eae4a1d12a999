#include "ncp/sweep.hpp"

#include <algorithm>

namespace ncp {

namespace {
struct Event {
  double value;
  bool is_left;
  double weight;
};
}  // namespace

PredictionSet sweep_union(std::span<const SweepEntry> entries, double threshold) {
  if (threshold < 0.0) return PredictionSet::full_line();

  std::vector<Event> events;
  events.reserve(entries.size() * 2);
  for (const SweepEntry& e : entries) {
    events.push_back({e.interval.lo, true, e.weight});
    events.push_back({e.interval.hi, false, e.weight});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.is_left && !b.is_left;  // left endpoints first at ties
  });

  std::vector<Interval> pieces;
  double running = 0.0;
  bool open = false;
  double left = 0.0;
  for (const Event& ev : events) {
    if (ev.is_left) {
      running += ev.weight;
      if (!open && running > threshold) {
        open = true;
        left = ev.value;
      }
    } else {
      if (open && running - ev.weight <= threshold) {
        pieces.emplace_back(left, ev.value);
        open = false;
      }
      running -= ev.weight;
    }
  }
  return PredictionSet::from_pieces(std::move(pieces));
}

}  // namespace ncp
