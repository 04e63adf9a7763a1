#include <doctest.h>

#include <random>

#include "gridwarp/core.hpp"
#include "support.hpp"

using namespace gridwarp;
using gridwarp::testing::rect_elements;
using gridwarp::testing::segment;

TEST_CASE("bilinear weights on a node") {
  const auto s = bilinear_weights(Point2(3.0, 5.0), 16);
  double on_node = 0.0, others = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (s.nodes[k] == Eigen::Vector2i(3, 5)) on_node += s.weights[k];
    else others += std::abs(s.weights[k]);
  }
  CHECK(on_node == 1.0);
  CHECK(others == 0.0);
}

TEST_CASE("bilinear weights inside a cell") {
  const auto s = bilinear_weights(Point2(3.25, 5.75), 16);
  CHECK(s.nodes[0] == Eigen::Vector2i(3, 5));
  CHECK(s.nodes[1] == Eigen::Vector2i(4, 5));
  CHECK(s.nodes[2] == Eigen::Vector2i(3, 6));
  CHECK(s.nodes[3] == Eigen::Vector2i(4, 6));
  CHECK(s.weights[0] == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(s.weights[1] == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(s.weights[2] == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(s.weights[3] == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("bilinear weights on the top edge") {
  const auto s = bilinear_weights(Point2(0.5, 0.0), 8);
  CHECK(s.nodes[0] == Eigen::Vector2i(0, 0));
  CHECK(s.nodes[1] == Eigen::Vector2i(1, 0));
  CHECK(s.weights[0] == 0.5);
  CHECK(s.weights[1] == 0.5);
  CHECK(s.weights[2] == 0.0);
  CHECK(s.weights[3] == 0.0);
}

TEST_CASE("bilinear weights on the far corner stay in the last cell") {
  const auto s = bilinear_weights(Point2(7.0, 7.0), 8);
  CHECK(s.nodes[3] == Eigen::Vector2i(7, 7));
  CHECK(s.weights[3] == 1.0);
}

TEST_CASE("bilinear weights reject points outside the grid") {
  CHECK_THROWS_AS(bilinear_weights(Point2(-0.01, 2.0), 8), DomainError);
  CHECK_THROWS_AS(bilinear_weights(Point2(2.0, 7.0001), 8), DomainError);
  CHECK_THROWS_AS(bilinear_weights(Point2(std::nan(""), 2.0), 8), DomainError);
  CHECK_THROWS_AS(bilinear_weights(Point2(0.0, 0.0), 1), DomainError);
}

TEST_CASE("bilinear weights form a partition of unity and reproduce linear functions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.0, 31.0), coef(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Point2 p(pos(rng), pos(rng));
    const auto s = bilinear_weights(p, 32);
    double sum = 0.0;
    for (double w : s.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-15);
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    double f = 0.0;
    for (int k = 0; k < 4; ++k) f += s.weights[k] * (a * s.nodes[k].x() + b * s.nodes[k].y() + c);
    CHECK(std::abs(f - (a * p.x() + b * p.y() + c)) < 1e-12);
  }
}

TEST_CASE("interpolate reads bilinear values off a plane") {
  Plane<double> plane(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) plane(y, x) = 2.0 * x - 3.0 * y + 1.0;
  CHECK(interpolate(plane, Point2(1.5, 2.25)) == doctest::Approx(2.0 * 1.5 - 3.0 * 2.25 + 1.0));
}

TEST_CASE("resample_polyline examples") {
  SUBCASE("straight segment at the interval") {
    const auto pts = resample_polyline(segment({0, 0}, {48, 0}), 16.0);
    REQUIRE(pts.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK((pts[std::size_t(k)] - Point2(16.0 * k, 0)).norm() < 1e-12);
  }
  SUBCASE("short segment keeps both endpoints") {
    const auto pts = resample_polyline(segment({0, 0}, {10, 0}), 16.0);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0] == Point2(0, 0));
    CHECK(pts[1] == Point2(10, 0));
  }
  SUBCASE("right angle") {
    Polyline line;
    line.points = {{0, 0}, {16, 0}, {16, 16}};
    const auto pts = resample_polyline(line, 16.0);
    REQUIRE(pts.size() == 3);
    CHECK((pts[0] - Point2(0, 0)).norm() < 1e-12);
    CHECK((pts[1] - Point2(16, 0)).norm() < 1e-12);
    CHECK((pts[2] - Point2(16, 16)).norm() < 1e-12);
  }
  SUBCASE("zero length") {
    Polyline line;
    line.points = {{5, 5}, {5, 5}};
    CHECK(resample_polyline(line, 4.0).empty());
  }
}

// Independent walk: position at arc length s along the polyline.
static Point2 walk(const Polyline& line, double s) {
  for (std::size_t k = 0; k + 1 < line.points.size(); ++k) {
    const double len = (line.points[k + 1] - line.points[k]).norm();
    if (s <= len || k + 2 == line.points.size())
      return line.points[k] + (line.points[k + 1] - line.points[k]) * (std::min(s, len) / len);
    s -= len;
  }
  return line.points.back();
}

TEST_CASE("resample_polyline matches an arc-length walk and preserves order") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    Polyline line;
    for (int k = 0; k < 6; ++k) line.points.emplace_back(20.0 * k + d(rng) * 0.1, d(rng));
    const double interval = 3.0 + d(rng) * 0.1;
    const auto pts = resample_polyline(line, interval);
    REQUIRE(pts.size() >= 2);
    CHECK(pts.front() == line.points.front());
    CHECK(pts.back() == line.points.back());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      CHECK((pts[k + 1] - pts[k]).norm() <= interval + 1e-9);
      if (k + 2 < pts.size()) CHECK((pts[k] - walk(line, interval * double(k))).norm() < 1e-9);
    }
    // order preserved: x is monotone because the input is
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) CHECK(pts[k + 1].x() >= pts[k].x() - 1e-12);
  }
}

TEST_CASE("arc-length curve endpoints and midpoint") {
  Polyline line;
  line.points = {{0, 0}, {10, 0}, {10, 10}};
  const ArcLengthCurve c(line);
  CHECK(c.length() == doctest::Approx(20.0));
  CHECK((c(0.0) - Point2(0, 0)).norm() < 1e-12);
  CHECK((c(0.5) - Point2(10, 0)).norm() < 1e-12);
  CHECK((c(0.75) - Point2(10, 5)).norm() < 1e-12);
  CHECK((c(1.0) - Point2(10, 10)).norm() < 1e-12);
}

TEST_CASE("element validation") {
  GeometricElements e = rect_elements(100, 80, 5, 5, 95, 75);
  CHECK_NOTHROW(validate(e));
  SUBCASE("missing side") {
    e.left.points.clear();
    CHECK_THROWS_AS(validate(e), ConfigError);
  }
  SUBCASE("point outside the image") {
    e.text_lines.push_back(segment({10, 10}, {120, 10}));
    CHECK_THROWS_AS(validate(e), ConfigError);
  }
  SUBCASE("points on the frame edge are allowed") {
    e.text_lines.push_back(segment({0, 80}, {100, 80}));
    CHECK_NOTHROW(validate(e));
  }
}

TEST_CASE("grid mapping and rescale") {
  const Point2 g = to_grid(Point2(511, 0), 512, 512, 128);
  CHECK(g.x() == doctest::Approx(127.0));
  CHECK((grid_to_pixel(to_grid(Point2(123.4, 56.7), 300, 200, 64), 300, 200, 64) - Point2(123.4, 56.7)).norm() <
        1e-12);
  const GeometricElements e = rect_elements(300, 200, 0, 0, 299, 199);
  const GeometricElements r = rescale(e, 512, 512);
  CHECK(r.width == 512);
  CHECK((r.right.points.back() - Point2(511, 511)).norm() < 1e-12);
}

TEST_CASE("uniform grid field") {
  const GridField f = GridField::uniform(5);
  CHECK(f.at(4, 2) == Point2(1.0, 0.5));
  CHECK(f.flat(0)(2 * 5 + 4) == 1.0);
  CHECK(f.all_finite());
}

TEST_CASE("gray conversion uses Rec. 601 luma") {
  ImageBuffer rgb(1, 1, 3);
  rgb.at(0, 0, 0) = 255;
  CHECK(to_gray(rgb).at(0, 0) == 76);
}
