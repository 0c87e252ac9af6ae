#pragma once

// Local east-north-up approximation around a declared origin. Equirectangular:
// adequate for city-sized extracts (under 50 km across).

#include <cmath>
#include <numbers>

#include "ramacity/error.hpp"
#include "ramacity/polygon.hpp"

namespace ramacity::geo {

inline constexpr double kMetersPerDegree = 111320.0;
inline constexpr double kMaxAbsLatitude = 85.0;
inline constexpr double kMaxSpanMeters = 50000.0;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

inline bool valid_origin(LonLat o) {
  return std::isfinite(o.lat) && std::isfinite(o.lon) && std::abs(o.lat) < kMaxAbsLatitude &&
         std::abs(o.lon) <= 180.0;
}

inline double meters_per_degree_lon(double lat0) {
  return std::cos(lat0 * std::numbers::pi / 180.0) * kMetersPerDegree;
}

inline Vec2 project_lonlat(LonLat p, LonLat origin) {
  if (!valid_origin(origin)) throw Error(ErrorCode::OutOfDomain, "origin latitude out of range");
  if (!(std::abs(p.lat) < kMaxAbsLatitude)) throw Error(ErrorCode::OutOfDomain, "latitude out of range");
  const Vec2 out{(p.lon - origin.lon) * meters_per_degree_lon(origin.lat), (p.lat - origin.lat) * kMetersPerDegree};
  if (!(std::hypot(out.x, out.y) <= kMaxSpanMeters)) {
    throw Error(ErrorCode::OutOfDomain, "point lies more than 50 km from the origin");
  }
  return out;
}

inline LonLat unproject(Vec2 xy, LonLat origin) {
  if (!valid_origin(origin)) throw Error(ErrorCode::OutOfDomain, "origin latitude out of range");
  return {origin.lon + xy.x / meters_per_degree_lon(origin.lat), origin.lat + xy.y / kMetersPerDegree};
}

}  // namespace ramacity::geo
