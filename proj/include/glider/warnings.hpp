#pragma once

#include <string>
#include <utility>
#include <vector>

namespace glider {

// Collects non-fatal diagnostics so library code never writes to stderr on
// its own; callers decide what to surface.
struct Warnings {
    std::vector<std::string> messages;

    void add(std::string msg) { messages.push_back(std::move(msg)); }
    bool empty() const { return messages.empty(); }
    std::size_t size() const { return messages.size(); }
};

inline void warn(Warnings* w, std::string msg) {
    if (w != nullptr) w->add(std::move(msg));
}

}  // namespace glider
