#pragma once

// Brute-force reference for the rolling mechanism and the receiver walk.
// It never keeps residuals: it lays out every neuron's absolute firing times
// up front, sorts the union by (time, neuron), and walks the sorted list.
// Shares no code with the engine beyond the Duration type.

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "htif/duration.hpp"

namespace reference {

struct Event {
  htif::Duration time;
  std::size_t neuron;
  int mark;
};

struct Train {
  std::vector<htif::Duration> z;
  std::vector<std::uint64_t> m;
  std::vector<htif::Duration> fire;
};

// isis[i][j] is the (j+1)-th ISI of neuron i. Free running: neuron i fires at the
// prefix sums of its own ISIs. Round synchronized: round r starts when the last
// neuron fired in round r-1, and neuron i fires at start_r + isis[i][r].
inline std::vector<Event> pooled_events(const std::vector<std::vector<htif::Duration>>& isis,
                                        const std::vector<int>& marks, bool synchronized, std::size_t count) {
  std::vector<Event> all;
  const std::size_t n = isis.size();
  if (synchronized) {
    htif::Duration start;
    for (std::size_t r = 0; r < isis[0].size(); ++r) {
      htif::Duration latest = start;
      for (std::size_t i = 0; i < n; ++i) {
        const htif::Duration t = start + isis[i][r];
        all.push_back({t, i, marks[i]});
        latest = std::max(latest, t);
      }
      start = latest;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      htif::Duration t;
      for (const auto& s : isis[i]) {
        t += s;
        all.push_back({t, i, marks[i]});
      }
    }
  }
  std::sort(all.begin(), all.end(),
            [](const Event& a, const Event& b) { return std::tie(a.time, a.neuron) < std::tie(b.time, b.neuron); });
  if (all.size() > count) all.resize(count);
  return all;
}

inline Train walk(const std::vector<Event>& events, const std::vector<bool>& in_pool, int b) {
  Train out;
  int y = 0;
  std::uint64_t seen = 0;
  htif::Duration last;
  for (const auto& e : events) {
    if (!in_pool[e.neuron]) continue;
    ++seen;
    y += e.mark;
    if (y == b) {
      out.z.push_back(e.time - last);
      out.m.push_back(seen);
      out.fire.push_back(e.time);
      last = e.time;
      y = 0;
    }
  }
  return out;
}

}  // namespace reference
