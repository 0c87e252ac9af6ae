#pragma once

// Golden-vector text format: one record per line,
//   X Y Z d -> x y z
// frame-local meters, 9 significant digits. Blank lines and lines starting
// with '#' are ignored on read.

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ramacity/error.hpp"
#include "ramacity/geometry.hpp"
#include "ramacity/random.hpp"

namespace ramacity::golden {

struct Record {
  Vec3 input;
  double diameter_m = geometry::kRamaDiameter;
  Vec3 output;
};

inline std::string format_record(const Record& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g -> %.9g %.9g %.9g", r.input.x, r.input.y, r.input.z,
                r.diameter_m, r.output.x, r.output.y, r.output.z);
  return buf;
}

inline Record make_record(Vec3 input, double d) { return {input, d, geometry::deform_local(input, d)}; }

/// The three analytic anchors (tangent line, X = d symmetry point, ground
/// level) followed by `n` seeded samples.
inline std::vector<Record> generate(std::size_t n, std::uint64_t seed, double d = geometry::kRamaDiameter) {
  std::vector<Record> out;
  out.reserve(n + 3);
  out.push_back(make_record({0.0, 3.0, 50.0}, d));
  out.push_back(make_record({d, 0.0, 0.0}, d));
  out.push_back(make_record({1234.0, -500.0, 0.0}, d));
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double X = rng.uniform(-d, 4.0 * d);
    const double Y = rng.uniform(-2.0 * d, 2.0 * d);
    const double Z = rng.uniform(0.0, 0.1 * d);
    out.push_back(make_record({X, Y, Z}, d));
  }
  return out;
}

inline void write(std::ostream& os, const std::vector<Record>& records) {
  for (const auto& r : records) os << format_record(r) << '\n';
}

inline std::string to_text(const std::vector<Record>& records) {
  std::ostringstream os;
  write(os, records);
  return os.str();
}

inline std::vector<Record> read(std::istream& is) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Record r;
    std::string arrow;
    if (!(ls >> r.input.x >> r.input.y >> r.input.z >> r.diameter_m >> arrow >> r.output.x >> r.output.y >>
          r.output.z) ||
        arrow != "->") {
      throw Error(ErrorCode::ParseError, "golden record malformed at line " + std::to_string(line_no), line_no);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace ramacity::golden
