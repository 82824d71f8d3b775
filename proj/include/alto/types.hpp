#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "alto/error.hpp"

namespace alto {

enum class Channel { left, right, top, bottom };

// Each pair lives on its own audio device. The first-listed channel
// (left, top) is the pair's reference for signed quantities.
enum class Pair { left_right, top_bottom };

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

constexpr Pair pair_of(Channel c) {
    return (c == Channel::left || c == Channel::right) ? Pair::left_right : Pair::top_bottom;
}

constexpr Channel first_of(Pair p) { return p == Pair::left_right ? Channel::left : Channel::top; }
constexpr Channel second_of(Pair p) { return p == Pair::left_right ? Channel::right : Channel::bottom; }

constexpr std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::left: return "left";
        case Channel::right: return "right";
        case Channel::top: return "top";
        case Channel::bottom: return "bottom";
    }
    return "?";
}

constexpr std::string_view to_string(Pair p) {
    return p == Pair::left_right ? "left_right" : "top_bottom";
}

inline Channel parse_channel(std::string_view s) {
    if (s == "left") return Channel::left;
    if (s == "right") return Channel::right;
    if (s == "top") return Channel::top;
    if (s == "bottom") return Channel::bottom;
    throw Error(ErrorKind::format, "unknown channel '" + std::string(s) + "'");
}

inline Pair parse_pair(std::string_view s) {
    if (s == "left_right") return Pair::left_right;
    if (s == "top_bottom") return Pair::top_bottom;
    throw Error(ErrorKind::format, "unknown pair '" + std::string(s) + "'");
}

} // namespace alto
