#include "taskbench/geometry.hpp"

#include <algorithm>

namespace taskbench {

double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return norm(p - s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return norm(p - (s.a + t * d));
}

namespace {

bool segments_intersect(const Segment& s, const Segment& t) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
  auto on_segment = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
  };
  const double d1 = orient(t.a, t.b, s.a);
  const double d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a);
  const double d4 = orient(s.a, s.b, t.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(t.a, t.b, s.a)) ||
         (d2 == 0 && on_segment(t.a, t.b, s.b)) ||
         (d3 == 0 && on_segment(s.a, s.b, t.a)) ||
         (d4 == 0 && on_segment(s.a, s.b, t.b));
}

}  // namespace

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir,
                                           const Segment& s) {
  const Vec2 e = s.b - s.a;
  const Vec2 w = s.a - origin;
  const double denom = cross(dir, e);
  if (denom == 0.0) {
    // Parallel. Only a collinear segment can be hit.
    if (cross(w, dir) != 0.0) return std::nullopt;
    const double ta = dot(s.a - origin, dir);
    const double tb = dot(s.b - origin, dir);
    if (ta <= 0.0 && tb <= 0.0) return std::nullopt;
    if (ta > 0.0 && tb > 0.0) return std::min(ta, tb);
    return std::nullopt;  // origin lies on the segment
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t <= 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

}  // namespace taskbench
