#ifndef GRFSWARM_VEC2_HPP_
#define GRFSWARM_VEC2_HPP_

#include <cmath>

namespace grfswarm {

/// Planar vector used for poses, velocities and relative offsets (meters, m/s).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator-(const Vec2 &a) { return {-a.x, -a.y}; }
  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;
};

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2 &a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(const Vec2 &a, const Vec2 &b) { return norm(b - a); }

/// Scales `v` down so that its norm does not exceed `limit`.
inline Vec2 clamp_norm(const Vec2 &v, double limit) {
  const double n = norm(v);
  if (n <= limit) return v;
  if (limit <= 0.0 || n == 0.0) return {};
  return v * (limit / n);
}

} // namespace grfswarm

#endif // GRFSWARM_VEC2_HPP_
