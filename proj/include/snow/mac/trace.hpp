// Copyright 2026 The snow-lpwan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNOW_MAC_TRACE_HPP_
#define SNOW_MAC_TRACE_HPP_

// MAC trace log. CSV with header "tick,node,event,subcarrier"; node -1 is the
// base station and subcarrier -1 means "not tied to one".

#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace snow::mac {

struct TraceEvent {
  std::int64_t tick = 0;
  std::int64_t node = -1;
  std::string event;
  std::int64_t subcarrier = -1;

  bool operator==(const TraceEvent&) const = default;
};

inline constexpr const char* kTraceHeader = "tick,node,event,subcarrier";

class TraceLog {
 public:
  void add(std::int64_t tick, std::int64_t node, std::string event, std::int64_t sc = -1) {
    events_.push_back({tick, node, std::move(event), sc});
  }

  const std::vector<TraceEvent>& events() const { return events_; }

  std::size_t count(const std::string& event) const {
    std::size_t n = 0;
    for (const auto& e : events_) n += e.event == event;
    return n;
  }

  void write_csv(std::ostream& os) const {
    os << kTraceHeader << '\n';
    for (const auto& e : events_) {
      os << e.tick << ',' << e.node << ',' << e.event << ',' << e.subcarrier << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

 private:
  std::vector<TraceEvent> events_;
};

}  // namespace snow::mac

#endif  // SNOW_MAC_TRACE_HPP_
