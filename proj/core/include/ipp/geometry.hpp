#pragma once

#include <cmath>

namespace ipp {

// A planar location in meters.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point& a, const Point& b) {
        return a.x == b.x && a.y == b.y;
    }
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Distance from p to the closed segment [a, b].
inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return distance(p, a);
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::fmin(1.0, std::fmax(0.0, t));
    return distance(p, Point{a.x + t * dx, a.y + t * dy});
}

}  // namespace ipp
