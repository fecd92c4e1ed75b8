#pragma once

#include <cstdint>
#include <filesystem>

#include "colortac/dataset.hpp"
#include "colortac/descriptor.hpp"
#include "colortac/geometry.hpp"
#include "colortac/mechanics.hpp"
#include "colortac/optics.hpp"
#include "json.hpp"

namespace colortac {

/// Everything a run is parameterised by. Every JSON key is optional; missing
/// keys keep the defaults below and unknown keys are rejected.
///
/// {
///   "geometry":  {"slab_width_mm", "slab_height_mm", "slab_thickness_mm", "receiver_pitch_mm",
///                 "emitter_edges": {"red": "left", "green": "top", "blue": "right"}},
///   "grid":      {"pitch_mm", "origin_mm": [x, y]},
///   "mechanics": {"youngs_modulus_pa", "max_depth_mm", "max_force_n" | "effective_area_mm2"},
///   "optics":    {"source_intensity", "beam_spot_mm", "absorption_gain", "reflection_gain",
///                 "contact_radius_mm", "noise_sigma", "seed"},
///   "frame":     {"width", "height", "disc_radius", "disc_spacing"},
///   "roi":       {"width", "height", "black_threshold"},
///   "sweep":     {"n_trials", "samples_per_state", "depth_levels", "drift_sigma"}
/// }
struct Config {
  GeometryConfig geometry;
  ContactGrid grid;
  double youngs_modulus_pa = 5.9e6;
  double max_depth_mm = 3.0;
  double max_force_n = 18.0;
  double effective_area_mm2 = 0.0;  // > 0 overrides calibration from max_force_n
  OpticsParams optics;
  int frame_width = 640;
  int frame_height = 480;
  int disc_radius = 18;
  int disc_spacing = 80;
  int roi_width = 40;
  int roi_height = 40;
  int black_threshold = 10;
  SweepSpec sweep;

  SensorGeometry sensor() const { return SensorGeometry::from_config(geometry); }
  MechanicsParams mechanics() const;
  FrameSpec frame() const { return FrameSpec::grid(frame_width, frame_height, disc_radius, disc_spacing); }
  RoiSpec rois() const { return RoiSpec::around(frame(), roi_width, roi_height, black_threshold); }

  /// Builds every derived object once so configuration errors surface early.
  void validate() const;
};

Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& config);
Config load_config(const std::filesystem::path& path);
/// FNV-1a of the canonical JSON dump of the effective configuration.
std::uint64_t config_hash(const Config& config);

}  // namespace colortac
