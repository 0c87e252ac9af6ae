#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ramacity/geometry.hpp"
#include "ramacity/golden.hpp"
#include "ramacity/random.hpp"

using namespace ramacity;
using namespace ramacity::geometry;

namespace {

constexpr double kD = 5000.0;

// Stereographic construction from the top of the cylinder: intersect the line
// from (0, d) to (X, 0) with the circle x^2 + (z - d/2)^2 = (d/2)^2 by solving
// the quadratic in the line parameter. Independent of project_ground's closed form.
Vec3 stereographic_oracle(double X, double Y, double d) {
  const double px = 0.0, pz = d;
  const double vx = X, vz = -d;
  const double cz = 0.5 * d, r = 0.5 * d;
  const double a = vx * vx + vz * vz;
  const double b = 2.0 * (px * vx + (pz - cz) * vz);
  const double c = px * px + (pz - cz) * (pz - cz) - r * r;  // zero: (0, d) is on the circle
  const double disc = b * b - 4.0 * a * c;
  const double s = (-b + std::sqrt(disc)) / (2.0 * a);  // the non-trivial root
  return {px + s * vx, Y, pz + s * vz};
}

// q' then a straight move of Z toward the axis point (0, Y, d/2).
Vec3 elevated_oracle(Vec3 p, double d) {
  if (p.x <= 0.0) return p;
  const Vec3 ground = stereographic_oracle(p.x, p.y, d);
  const Vec3 axis_point{0.0, p.y, 0.5 * d};
  return ground + normalized(axis_point - ground) * p.z;
}

double axis_distance(Vec3 local, double d) { return std::hypot(local.x, local.z - 0.5 * d); }

}  // namespace

TEST(UserFrame, AxisAlignedNorth) {
  const auto f = make_user_frame({10, 20, 0}, {0, 1, 0});
  EXPECT_EQ(f.forward, (Vec3{0, 1, 0}));
  EXPECT_DOUBLE_EQ(f.left.x, -1.0);
  EXPECT_DOUBLE_EQ(f.left.y, 0.0);
  EXPECT_EQ(f.origin, (Vec3{10, 20, 0}));
}

TEST(UserFrame, DiscardsVerticalComponent) {
  const auto f = make_user_frame({0, 0, 35}, {1, 0, -0.5});
  EXPECT_EQ(f.forward, (Vec3{1, 0, 0}));
  EXPECT_EQ(f.origin.z, 0.0);
}

TEST(UserFrame, VerticalGazeIsDegenerate) {
  try {
    make_user_frame({0, 0, 0}, {0, 0, 1});
    FAIL() << "expected DegenerateView";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateView);
  }
  EXPECT_THROW(make_user_frame({0, 0, 0}, {1e-12, 0, 1}), Error);
}

TEST(UserFrame, LocalWorldRoundTrip) {
  const auto f = make_user_frame({120, -40, 0}, {0.3, 0.8, 0.1});
  const Vec3 p{431.5, -77.25, 12.0};
  const Vec3 back = f.to_world(f.to_local(p));
  EXPECT_NEAR(back.x, p.x, 1e-9);
  EXPECT_NEAR(back.y, p.y, 1e-9);
  EXPECT_EQ(back.z, p.z);
  EXPECT_NEAR(norm(cross(f.forward, f.left) - kUp), 0.0, 1e-15);
}

TEST(ProjectGround, IdentityAtTangentLine) {
  EXPECT_EQ(project_ground(0, 7, kD), (Vec3{0, 7, 0}));
}

TEST(ProjectGround, SymmetryPoint) {
  EXPECT_EQ(project_ground(kD, 0, kD), (Vec3{2500, 0, 2500}));
}

TEST(ProjectGround, FarFieldApproachesTop) {
  const Vec3 q = project_ground(1e9, 0, kD);
  EXPECT_LT(std::abs(q.x), 0.03);
  EXPECT_LT(std::abs(q.z - 5000.0), 0.03);
}

TEST(ProjectGround, MatchesStereographicConstruction) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double X = rng.uniform(0.0, 20 * kD);
    const Vec3 got = project_ground(X, 1.0, kD);
    const Vec3 want = stereographic_oracle(X, 1.0, kD);
    EXPECT_NEAR(got.x, want.x, 1e-9 * kD);
    EXPECT_NEAR(got.z, want.z, 1e-9 * kD);
  }
}

TEST(DeformPoint, AboveTangentLineGoesStraightUp) {
  EXPECT_EQ(deform_local({0, 3, 50}, kD), (Vec3{0, 3, 50}));
  EXPECT_EQ(deform_local({0, 3, 50}, 123.0), (Vec3{0, 3, 50}));
}

TEST(DeformPoint, GroundLevelReducesToProjection) {
  for (double X : {1.0, 250.0, 4999.0, 37000.0}) {
    EXPECT_EQ(deform_local({X, -8, 0}, kD), project_ground(X, -8, kD));
  }
}

TEST(DeformPoint, ElevatedSymmetryPoint) {
  // q' = (2500, 0, 2500) sits level with the axis, so the 100 m push is
  // horizontal: the result is 2400 m from the axis.
  const Vec3 q = deform_local({5000, 0, 100}, kD);
  EXPECT_NEAR(q.x, 2400.0, 1e-9);
  EXPECT_EQ(q.y, 0.0);
  EXPECT_NEAR(q.z, 2500.0, 1e-9);
  EXPECT_NEAR(axis_distance(q, kD), 2400.0, 1e-9);
  const Vec3 o = elevated_oracle({5000, 0, 100}, kD);
  EXPECT_NEAR(distance(q, o), 0.0, 1e-9);
}

TEST(DeformPoint, MatchesGeometricOracle) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p{rng.uniform(-kD, 10 * kD), rng.uniform(-kD, kD), rng.uniform(0, 0.49 * kD)};
    EXPECT_LT(distance(deform_local(p, kD), elevated_oracle(p, kD)), 1e-9 * kD);
  }
}

TEST(DeformPoint, BehindUserIsIdentityInWorldFrame) {
  CylinderSpec spec;
  spec.frame = make_user_frame({100, 100, 0}, {0, 1, 0});
  const Vec3 behind{130, 40, 25};
  const auto out = deform_point(behind, spec);
  EXPECT_EQ(out.position, behind);
  EXPECT_EQ(out.source, behind);
  // Directly in front, 1 km north.
  const auto front = deform_point({100, 1100, 0}, spec);
  EXPECT_NEAR(front.position.x, 100.0, 1e-9);
  EXPECT_LT(front.position.y, 1100.0);
  EXPECT_GT(front.position.z, 0.0);
}

TEST(DeformPoint, HeightAtRadiusRejected) {
  try {
    deform_local({100, 0, 2500}, kD);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HeightExceedsRadius);
  }
  CylinderSpec spec;
  EXPECT_THROW(deform_point({-5, 0, 2600}, spec), Error);
  EXPECT_NO_THROW(deform_point({5, 0, 2499.999}, spec));
}

TEST(DeformPoint, BlendUsesLogInterpolatedDiameter) {
  EXPECT_EQ(effective_diameter(0.0, kD), 1e7);
  EXPECT_EQ(effective_diameter(1.0, kD), kD);
  EXPECT_NEAR(effective_diameter(0.5, kD), std::sqrt(1e7 * kD), 1e-6 * std::sqrt(1e7 * kD));
  CylinderSpec spec;
  spec.blend = 0.5;
  const Vec3 p{3000, 10, 20};
  EXPECT_EQ(deform_point(p, spec).position, deform_local(p, spec.effective_diameter()));
}

TEST(InverseDeform, SymmetryPoint) {
  const Vec3 p = inverse_local({2500, 0, 2500}, kD);
  EXPECT_NEAR(p.x, 5000.0, 1e-9);
  EXPECT_EQ(p.y, 0.0);
  EXPECT_NEAR(p.z, 0.0, 1e-9);
}

TEST(InverseDeform, AxisIsSingular) {
  try {
    inverse_local({0, 0, 2500}, kD);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInvertible);
  }
  EXPECT_THROW(inverse_local({-3, 0, 10}, kD), Error);     // behind
  EXPECT_THROW(inverse_local({3000, 0, 100}, kD), Error);  // outside the cylinder
}

TEST(InverseDeform, RoundTripFixedPoint) {
  CylinderSpec spec;
  const Vec3 p{1234, -500, 80};
  const Vec3 back = inverse_deform(deform_point(p, spec).position, spec);
  EXPECT_LT(distance(back, p), 1e-6);
}

TEST(InverseDeform, RoundTripInRotatedFrame) {
  CylinderSpec spec;
  spec.frame = make_user_frame({-300, 800, 0}, {0.6, -0.8, 0});
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 local{rng.uniform(1e-3, 10 * kD), rng.uniform(-10 * kD, 10 * kD), rng.uniform(0, 0.49 * kD)};
    const Vec3 p = spec.frame.to_world(local);
    EXPECT_LT(distance(inverse_deform(deform_point(p, spec).position, spec), p), 1e-6);
  }
}

TEST(InverseDeform, RoundTripProperty) {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p{rng.uniform(0, 10 * kD), rng.uniform(-10 * kD, 10 * kD), rng.uniform(0, 0.49 * kD)};
    if (p.x == 0.0) continue;
    worst = std::max(worst, distance(inverse_local(deform_local(p, kD), kD), p));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(DeformMesh, EmptyInEmptyOut) {
  EXPECT_TRUE(deform_mesh({}, CylinderSpec{}).empty());
}

TEST(DeformMesh, ElementWise) {
  CylinderSpec spec;
  spec.frame = make_user_frame({0, 0, 0}, {1, 0, 0});
  const std::vector<Vec3> quad{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const auto out = deform_mesh(quad, spec);
  ASSERT_EQ(out.size(), 4u);
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const auto single = deform_point(quad[i], spec);
    EXPECT_EQ(out[i].position, single.position);
    EXPECT_EQ(out[i].source, quad[i]);
  }
}

TEST(DeformMesh, ReportsOffendingVertex) {
  const std::vector<Vec3> verts{{1, 0, 0}, {2, 0, 10}, {3, 0, 2500}, {4, 0, 9000}};
  try {
    deform_mesh(verts, CylinderSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HeightExceedsRadius);
    ASSERT_TRUE(e.index().has_value());
    EXPECT_EQ(*e.index(), 2u);
  }
}

TEST(DeformMesh, MatchesGoldenVectors) {
  // Round-trip the golden text format; 9 significant digits bound the
  // error at about 5e-6 m for outputs below 5 km.
  const auto records = golden::generate(10000, 99);
  std::istringstream in(golden::to_text(records));
  const auto parsed = golden::read(in);
  ASSERT_EQ(parsed.size(), records.size());
  std::vector<Vec3> inputs;
  for (const auto& r : parsed) inputs.push_back(r.input);
  const auto out = deform_mesh(inputs, CylinderSpec{});
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, distance(out[i].position, parsed[i].output));
  EXPECT_LT(worst, 1e-3);
}

TEST(Intersection, SharedEndpointIntersects) {
  CylinderSpec spec;
  const Segment a{{100, 0, 0}, {800, 50, 40}};
  const Segment b{{800, 50, 40}, {1500, -200, 90}};
  EXPECT_TRUE(segments_intersect_after_deform(a, b, spec));
}

TEST(Intersection, CrossingSegmentsStillCross) {
  CylinderSpec spec;
  const Segment a{{1000, -100, 20}, {1000, 100, 20}};
  const Segment b{{900, 0, 20}, {1100, 0, 20}};
  EXPECT_TRUE(segments_intersect_after_deform(a, b, spec));
}

TEST(Intersection, DisjointBuildingEdgesStayDisjoint) {
  CylinderSpec spec;
  // Two 300 m towers 20 m apart along the view direction, 3 km out.
  const Segment a{{3000, 0, 0}, {3000, 0, 300}};
  const Segment b{{3020, 0, 0}, {3020, 0, 300}};
  EXPECT_FALSE(segments_intersect_after_deform(a, b, spec));
  EXPECT_GT(min_distance_after_deform(a, b, spec), 0.0);
}

TEST(Intersection, MinDistanceMatchesDenseSampling) {
  CylinderSpec spec;
  const Segment a{{200, -300, 10}, {1400, 500, 60}};
  const Segment b{{900, 400, 0}, {300, -100, 200}};
  double dense = std::numeric_limits<double>::infinity();
  const int n = 1500;
  for (int i = 0; i <= n; ++i) {
    const Vec3 pa = deform_point(lerp(a.a, a.b, double(i) / n), spec).position;
    for (int j = 0; j <= n; ++j) {
      dense = std::min(dense, distance(pa, deform_point(lerp(b.a, b.b, double(j) / n), spec).position));
    }
  }
  const double got = min_distance_after_deform(a, b, spec);
  EXPECT_LE(got, dense + 1e-9);
  EXPECT_GT(got, dense - 1.0);  // sample spacing is under 1 m
}

TEST(Intersection, RandomDisjointPairs) {
  CylinderSpec spec;
  Rng rng(5);
  int checked = 0;
  while (checked < 200) {
    auto pt = [&] { return Vec3{rng.uniform(-kD, 3 * kD), rng.uniform(-kD, kD), rng.uniform(0, 0.5 * kD)}; };
    const Segment a{pt(), pt()};
    const Segment b{pt(), pt()};
    if (a.a.z >= 0.5 * kD || a.b.z >= 0.5 * kD || b.a.z >= 0.5 * kD || b.b.z >= 0.5 * kD) continue;
    if (segment_distance(a, b) < 1.0) continue;
    EXPECT_FALSE(segments_intersect_after_deform(a, b, spec));
    ++checked;
  }
}

TEST(Properties, OnCylinder) {
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const double X = rng.uniform(0, 100 * kD);
    const Vec3 q = project_ground(X, 0, kD);
    EXPECT_LT(std::abs(q.x * q.x + (q.z - 0.5 * kD) * (q.z - 0.5 * kD) - 0.25 * kD * kD), 1e-6 * kD * kD);
  }
}

TEST(Properties, YPreservedAndRadialContract) {
  Rng rng(19);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p{rng.uniform(1e-6, 10 * kD), rng.uniform(-10 * kD, 10 * kD), rng.uniform(0, 0.49 * kD)};
    const Vec3 q = deform_local(p, kD);
    EXPECT_EQ(q.y, p.y);
    EXPECT_LT(std::abs(axis_distance(q, kD) - (0.5 * kD - p.z)), 1e-9 * kD);
  }
}

TEST(Properties, MonotoneArcPosition) {
  Rng rng(23);
  std::vector<double> xs;
  for (int i = 0; i < 5000; ++i) xs.push_back(rng.uniform(0, 50 * kD));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double prev = -1.0;
  for (double X : xs) {
    const Vec3 q = project_ground(X, 0, kD);
    // Angle swept from the tangent point, measured at the axis.
    const double angle = std::atan2(q.x, 0.5 * kD - q.z);
    EXPECT_GT(angle, prev);
    prev = angle;
  }
}

TEST(Properties, C1SeamAtUser) {
  const double h = 1e-3;
  const Vec3 at0 = deform_local({0, 0, 0}, kD);
  const Vec3 ath = deform_local({h, 0, 0}, kD);
  EXPECT_LT(std::abs((ath.x - at0.x) / h - 1.0), 1e-4);
  EXPECT_LT(std::abs((ath.z - at0.z) / h), 1e-4);
  // Behind side: identity, so the one-sided derivative is exactly (1, 0).
  const Vec3 behind = deform_local({-h, 0, 0}, kD);
  EXPECT_EQ((at0.x - behind.x) / h, 1.0);
  EXPECT_EQ(behind.z, 0.0);
}

TEST(Properties, FlatDiameterBarelyMoves) {
  double worst = 0.0;
  for (double X = -2000; X <= 2000; X += 100) {
    for (double Y = -2000; Y <= 2000; Y += 500) {
      for (double Z : {0.0, 100.0, 250.0, 500.0}) {
        const Vec3 p{X, Y, Z};
        worst = std::max(worst, distance(deform_local(p, kFlatDiameter), p));
      }
    }
  }
  EXPECT_LT(worst, 1.0);
  EXPECT_GT(worst, 0.0);
}
