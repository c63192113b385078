#pragma once

#include <cmath>

namespace crowdtrack {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z component of the 3D cross product; >0 when b is counter-clockwise of a.
constexpr double det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm_sq(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::sqrt(norm_sq(v)); }
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

// Zero vector maps to zero; callers that need a tie-break direction handle it.
inline Vec2 normalized_or_zero(Vec2 v) {
  double n = norm(v);
  return n > 0.0 ? v / n : Vec2{};
}

inline Vec2 clamped_norm(Vec2 v, double cap) {
  double n2 = norm_sq(v);
  if (n2 <= cap * cap) return v;
  return v * (cap / std::sqrt(n2));
}

inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace crowdtrack
