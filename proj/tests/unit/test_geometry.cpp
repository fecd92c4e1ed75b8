#include "doctest.h"

#include <cmath>
#include <set>
#include <utility>

#include "colortac/errors.hpp"
#include "colortac/geometry.hpp"

using namespace colortac;

TEST_CASE("location_coords examples") {
  const ContactGrid grid;
  CHECK(location_coords(grid, 12) == Point2{0.0, 0.0});
  CHECK(location_coords(grid, 0) == Point2{-16.0, -16.0});
  CHECK(location_coords(grid, 24) == Point2{16.0, 16.0});
  CHECK(location_coords(grid, 1) == Point2{-8.0, -16.0});
  CHECK(location_coords(grid, 5) == Point2{-16.0, -8.0});
  CHECK_THROWS_AS(location_coords(grid, 25), RangeError);
  CHECK_THROWS_AS(location_coords(grid, -1), RangeError);
}

TEST_CASE("corner location by enumerating the grid") {
  // 5 points at 8 mm pitch span 32 mm; centred in a 40 mm slab the first one sits 4 mm in.
  const ContactGrid grid;
  const auto geo = SensorGeometry::standard();
  double min_x = 1e9, min_y = 1e9;
  for (int i = 0; i < kLocations; ++i) {
    min_x = std::min(min_x, location_coords(grid, i).x);
    min_y = std::min(min_y, location_coords(grid, i).y);
  }
  CHECK(min_x == doctest::Approx(-geo.slab_width_mm / 2 + 4.0));
  CHECK(min_y == doctest::Approx(-geo.slab_height_mm / 2 + 4.0));
  CHECK(location_coords(grid, 0) == Point2{min_x, min_y});
}

TEST_CASE("location_coords are distinct and strictly inside the slab") {
  const ContactGrid grid;
  const auto geo = SensorGeometry::standard();
  std::set<std::pair<double, double>> seen;
  for (int i = 0; i < kLocations; ++i) {
    const auto p = location_coords(grid, i);
    seen.emplace(p.x, p.y);
    CHECK(std::abs(p.x) < geo.slab_width_mm / 2);
    CHECK(std::abs(p.y) < geo.slab_height_mm / 2);
    CHECK(geo.contains(p));
  }
  CHECK(seen.size() == 25);
}

TEST_CASE("depth_of_level") {
  CHECK(depth_of_level(5) == 3.0);
  CHECK(depth_of_level(1) == 0.6);
  CHECK_THROWS_AS(depth_of_level(0), RangeError);
  CHECK_THROWS_AS(depth_of_level(6), RangeError);
  for (int l = 1; l < kDepthLevels; ++l) CHECK(depth_of_level(l) < depth_of_level(l + 1));
  for (int l = 1; l <= kDepthLevels; ++l) {
    CHECK(depth_of_level(l) > 0.0);
    CHECK(depth_of_level(l) <= 3.0);
  }
}

TEST_CASE("class_index is a bijection onto 0..124") {
  CHECK(class_index(0, 1) == 0);
  CHECK(class_index(24, 5) == 124);
  CHECK(class_index(12, 3) == 62);

  std::set<int> seen;
  for (int loc = 0; loc < kLocations; ++loc) {
    for (int level = 1; level <= kDepthLevels; ++level) {
      const int c = class_index(loc, level);
      CHECK(c >= 0);
      CHECK(c < kClasses);
      seen.insert(c);
      CHECK(split_class_index(c) == LocationDepth{loc, level});
    }
  }
  CHECK(seen.size() == 125);

  CHECK_THROWS_AS(class_index(25, 1), RangeError);
  CHECK_THROWS_AS(class_index(0, 0), RangeError);
  CHECK_THROWS_AS(class_index(-1, 3), RangeError);
  CHECK_THROWS_AS(split_class_index(125), RangeError);
}

TEST_CASE("ContactState carries depth and coordinates") {
  const ContactGrid grid;
  const auto s = ContactState::make(grid, 7, 2);
  CHECK(s.depth_mm == depth_of_level(2));
  CHECK(s.position == location_coords(grid, 7));
  CHECK(s.flat_class() == 36);
  CHECK_THROWS_AS(ContactState::make(grid, 7, 0), RangeError);
}

TEST_CASE("standard sensor layout") {
  const auto g = SensorGeometry::standard();
  CHECK_NOTHROW(g.validate());
  // index = 3*row + col, rows from the bottom
  CHECK(g.receivers[0] == Point2{-5.0, -5.0});
  CHECK(g.receivers[4] == Point2{0.0, 0.0});
  CHECK(g.receivers[5] == Point2{5.0, 0.0});
  CHECK(g.receivers[7] == Point2{0.0, 5.0});
  CHECK(g.emitters[0].color == Color::red);
  CHECK(g.emitters[0].position == Point2{-20.0, 0.0});
  CHECK(g.emitters[1].position == Point2{0.0, 20.0});
  CHECK(g.emitters[2].position == Point2{20.0, 0.0});
}

TEST_CASE("emitter edge remapping") {
  GeometryConfig cfg;
  cfg.emitter_edges = {Edge::bottom, Edge::left, Edge::top};
  const auto g = SensorGeometry::from_config(cfg);
  CHECK(g.emitters[0].position == Point2{0.0, -20.0});
  CHECK(g.emitters[1].position == Point2{-20.0, 0.0});
  CHECK(g.emitters[2].position == Point2{0.0, 20.0});
  CHECK(edge_from_string("bottom") == Edge::bottom);
  CHECK_THROWS(edge_from_string("middle"));
}

TEST_CASE("invalid geometry is rejected") {
  GeometryConfig cfg;
  cfg.receiver_pitch_mm = 25.0;  // outer receivers leave the slab
  CHECK_THROWS_AS(SensorGeometry::from_config(cfg).validate(), ConfigError);
  GeometryConfig dup;
  dup.emitter_edges = {Edge::left, Edge::left, Edge::right};
  CHECK_THROWS_AS(SensorGeometry::from_config(dup).validate(), ConfigError);
  GeometryConfig flat;
  flat.slab_thickness_mm = 0.0;
  CHECK_THROWS_AS(SensorGeometry::from_config(flat).validate(), ConfigError);
}

TEST_CASE("distance_to_segment") {
  const Point2 a{0, 0}, b{10, 0};
  CHECK(distance_to_segment({5, 3}, a, b) == doctest::Approx(3.0));
  CHECK(distance_to_segment({-3, 4}, a, b) == doctest::Approx(5.0));
  CHECK(distance_to_segment({13, 4}, a, b) == doctest::Approx(5.0));
  CHECK(distance_to_segment({2, 2}, a, a) == doctest::Approx(std::sqrt(8.0)));
}
