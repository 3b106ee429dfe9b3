#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace taskbench {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

using Vec3 = std::array<double, 3>;

/// Planar pose; yaw in radians, kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct Segment {
  Vec2 a;
  Vec2 b;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Axis-aligned rectangle.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(Vec2 p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Axis-aligned 3D box given by centre and full side lengths.
struct Box3 {
  Vec3 centroid{};
  Vec3 extent{};

  friend bool operator==(const Box3&, const Box3&) = default;
};

double normalize_angle(double angle);

double point_segment_distance(Vec2 p, const Segment& s);

/// Minimum distance between two closed segments (zero when they intersect).
double segment_segment_distance(const Segment& s, const Segment& t);

/// Distance along the ray origin + t * dir (dir unit length, t > 0) to the
/// first point of the segment, or nullopt if the ray misses. Collinear
/// overlaps report the nearest endpoint ahead of the origin.
std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir,
                                           const Segment& s);

}  // namespace taskbench
