#pragma once

#include <cmath>

namespace swarmnet {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm_sq(Vec2 a) { return dot(a, a); }

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    return n > 0.0 ? a / n : Vec2{};
}

// Rescales vectors longer than max_norm back onto the max_norm circle,
// preserving direction. Shorter vectors pass through unchanged. The bound is
// exact: rounding in the rescale may not leave the result above max_norm.
inline Vec2 clamp_norm(Vec2 v, double max_norm) {
    const double n = norm(v);
    if (n <= max_norm || n == 0.0) return v;
    Vec2 scaled = v * (max_norm / n);
    while (norm(scaled) > max_norm) {
        scaled *= 0x1.fffffffffffffp-1;  // one ulp below 1
    }
    return scaled;
}

inline Vec2 rotated(Vec2 v, double angle_rad) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace swarmnet
