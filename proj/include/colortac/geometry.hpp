#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace colortac {

inline constexpr int kReceivers = 9;
inline constexpr int kEmitters = 3;
inline constexpr int kChannels = 3;
inline constexpr int kFeatures = kReceivers * kChannels;
inline constexpr int kGridSide = 5;
inline constexpr int kLocations = kGridSide * kGridSide;
inline constexpr int kDepthLevels = 5;
inline constexpr int kClasses = kLocations * kDepthLevels;
inline constexpr double kDepthStepMm = 0.6;

/// A point in the slab plane, millimetres, origin at the slab centre.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

/// Shortest distance from `p` to the closed segment [a, b].
double distance_to_segment(Point2 p, Point2 a, Point2 b);

enum class Color : std::uint8_t { red = 0, green = 1, blue = 2 };
enum class Edge : std::uint8_t { left, top, right, bottom };

std::string_view to_string(Color c);
std::string_view to_string(Edge e);
Edge edge_from_string(std::string_view name);

struct Emitter {
  Point2 position;
  Color color = Color::red;
};

/// Parameters the geometry is built from; this is what the JSON config carries.
struct GeometryConfig {
  double slab_width_mm = 40.0;
  double slab_height_mm = 40.0;
  double slab_thickness_mm = 5.0;
  double receiver_pitch_mm = 5.0;
  /// Edge holding the emitter of each color, indexed by Color.
  std::array<Edge, kEmitters> emitter_edges{Edge::left, Edge::top, Edge::right};
};

/// Fibre layout of the sensor.
///
/// Receivers form a 3x3 grid centred on the slab and are indexed row-major
/// from the bottom-left: index = 3*row + col, x = (col-1)*pitch,
/// y = (row-1)*pitch. Emitters sit at edge midpoints, one per color, and are
/// stored in Color order.
struct SensorGeometry {
  double slab_width_mm = 40.0;
  double slab_height_mm = 40.0;
  double slab_thickness_mm = 5.0;
  double receiver_pitch_mm = 5.0;
  std::array<Point2, kReceivers> receivers{};
  std::array<Emitter, kEmitters> emitters{};

  static SensorGeometry from_config(const GeometryConfig& config);
  static SensorGeometry standard() { return from_config(GeometryConfig{}); }

  /// Throws ConfigError if any invariant is broken.
  void validate() const;
  bool contains(Point2 p) const;
};

/// The 5x5 grid of calibration contact locations.
struct ContactGrid {
  double pitch_mm = 8.0;
  Point2 origin{};  // grid centre in slab coordinates

  static constexpr int n_locations = kLocations;
};

/// (x, y) of a location index: column = index mod 5, row = index div 5.
Point2 location_coords(const ContactGrid& grid, int index);

/// Indentation depth of a depth level, 0.6 mm per level.
double depth_of_level(int level);

/// Flat 125-class label: location*5 + (level-1).
int class_index(int location, int depth_level);

struct LocationDepth {
  int location = 0;
  int depth_level = 1;

  friend bool operator==(const LocationDepth&, const LocationDepth&) = default;
};

LocationDepth split_class_index(int flat_class);

struct ContactState {
  int location = 0;
  int depth_level = 1;
  double depth_mm = kDepthStepMm;
  Point2 position{};

  static ContactState make(const ContactGrid& grid, int location, int depth_level);
  int flat_class() const { return class_index(location, depth_level); }
};

}  // namespace colortac
