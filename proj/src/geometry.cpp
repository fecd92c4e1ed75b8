#include "colortac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "colortac/errors.hpp"

namespace colortac {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return distance(p, Point2{a.x + t * dx, a.y + t * dy});
}

std::string_view to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
  }
  return "?";
}

std::string_view to_string(Edge e) {
  switch (e) {
    case Edge::left: return "left";
    case Edge::top: return "top";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
  }
  return "?";
}

Edge edge_from_string(std::string_view name) {
  if (name == "left") return Edge::left;
  if (name == "top") return Edge::top;
  if (name == "right") return Edge::right;
  if (name == "bottom") return Edge::bottom;
  throw ConfigError("unknown slab edge '" + std::string(name) + "'");
}

namespace {

Point2 edge_midpoint(Edge e, double width, double height) {
  switch (e) {
    case Edge::left: return {-width / 2, 0.0};
    case Edge::top: return {0.0, height / 2};
    case Edge::right: return {width / 2, 0.0};
    case Edge::bottom: return {0.0, -height / 2};
  }
  return {};
}

}  // namespace

SensorGeometry SensorGeometry::from_config(const GeometryConfig& config) {
  SensorGeometry g;
  g.slab_width_mm = config.slab_width_mm;
  g.slab_height_mm = config.slab_height_mm;
  g.slab_thickness_mm = config.slab_thickness_mm;
  g.receiver_pitch_mm = config.receiver_pitch_mm;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      g.receivers[3 * row + col] = {(col - 1) * config.receiver_pitch_mm,
                                    (row - 1) * config.receiver_pitch_mm};
  for (int c = 0; c < kEmitters; ++c)
    g.emitters[c] = {edge_midpoint(config.emitter_edges[c], config.slab_width_mm, config.slab_height_mm),
                     static_cast<Color>(c)};
  g.validate();
  return g;
}

bool SensorGeometry::contains(Point2 p) const {
  return std::abs(p.x) <= slab_width_mm / 2 && std::abs(p.y) <= slab_height_mm / 2;
}

void SensorGeometry::validate() const {
  if (!(slab_width_mm > 0 && slab_height_mm > 0 && slab_thickness_mm > 0))
    throw ConfigError("slab dimensions must be positive");
  if (!(receiver_pitch_mm > 0)) throw ConfigError("receiver pitch must be positive");
  for (const auto& r : receivers)
    if (!contains(r)) throw ConfigError("receiver outside the slab");
  for (int i = 0; i < kEmitters; ++i) {
    if (!contains(emitters[i].position)) throw ConfigError("emitter outside the slab");
    for (int j = 0; j < i; ++j) {
      if (emitters[i].color == emitters[j].color) throw ConfigError("emitter colors must be distinct");
      if (emitters[i].position == emitters[j].position) throw ConfigError("emitters share an edge");
    }
  }
}

Point2 location_coords(const ContactGrid& grid, int index) {
  if (index < 0 || index >= kLocations)
    throw RangeError("location index " + std::to_string(index) + " outside 0..24");
  const int half = kGridSide / 2;
  return {grid.origin.x + grid.pitch_mm * (index % kGridSide - half),
          grid.origin.y + grid.pitch_mm * (index / kGridSide - half)};
}

double depth_of_level(int level) {
  if (level < 1 || level > kDepthLevels)
    throw RangeError("depth level " + std::to_string(level) + " outside 1..5");
  return kDepthStepMm * level;
}

int class_index(int location, int depth_level) {
  if (location < 0 || location >= kLocations)
    throw RangeError("location index " + std::to_string(location) + " outside 0..24");
  if (depth_level < 1 || depth_level > kDepthLevels)
    throw RangeError("depth level " + std::to_string(depth_level) + " outside 1..5");
  return location * kDepthLevels + (depth_level - 1);
}

LocationDepth split_class_index(int flat_class) {
  if (flat_class < 0 || flat_class >= kClasses)
    throw RangeError("class index " + std::to_string(flat_class) + " outside 0..124");
  return {flat_class / kDepthLevels, flat_class % kDepthLevels + 1};
}

ContactState ContactState::make(const ContactGrid& grid, int location, int depth_level) {
  return {location, depth_level, depth_of_level(depth_level), location_coords(grid, location)};
}

}  // namespace colortac
