#include "colortac/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "colortac/errors.hpp"
#include "colortac/hashing.hpp"

namespace colortac {

using nlohmann::json;

MechanicsParams Config::mechanics() const {
  if (effective_area_mm2 > 0)
    return MechanicsParams::from_area(youngs_modulus_pa, geometry.slab_thickness_mm, effective_area_mm2, max_depth_mm);
  return MechanicsParams::calibrated(youngs_modulus_pa, geometry.slab_thickness_mm, max_force_n, max_depth_mm);
}

void Config::validate() const {
  try {
    sensor();
    mechanics();
    rois();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  optics.validate();
  sweep.validate();
}

namespace {

void check_keys(const json& section, const char* name, std::initializer_list<const char*> allowed) {
  if (!section.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : section.items())
    if (!ok.contains(key)) throw ConfigError(std::string("unknown key '") + key + "' in config section '" + name + "'");
}

template <class T>
void read(const json& section, const char* key, T& target) {
  if (section.contains(key)) target = section.at(key).get<T>();
}

}  // namespace

Config config_from_json(const json& j) {
  Config c;
  try {
    check_keys(j, "root", {"geometry", "grid", "mechanics", "optics", "frame", "roi", "sweep"});
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      check_keys(g, "geometry",
                 {"slab_width_mm", "slab_height_mm", "slab_thickness_mm", "receiver_pitch_mm", "emitter_edges"});
      read(g, "slab_width_mm", c.geometry.slab_width_mm);
      read(g, "slab_height_mm", c.geometry.slab_height_mm);
      read(g, "slab_thickness_mm", c.geometry.slab_thickness_mm);
      read(g, "receiver_pitch_mm", c.geometry.receiver_pitch_mm);
      if (g.contains("emitter_edges")) {
        const auto& e = g.at("emitter_edges");
        check_keys(e, "emitter_edges", {"red", "green", "blue"});
        for (Color col : {Color::red, Color::green, Color::blue}) {
          const std::string key(to_string(col));
          if (e.contains(key)) c.geometry.emitter_edges[static_cast<int>(col)] = edge_from_string(e.at(key).get<std::string>());
        }
      }
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      check_keys(g, "grid", {"pitch_mm", "origin_mm"});
      read(g, "pitch_mm", c.grid.pitch_mm);
      if (g.contains("origin_mm")) {
        const auto o = g.at("origin_mm").get<std::array<double, 2>>();
        c.grid.origin = {o[0], o[1]};
      }
    }
    if (j.contains("mechanics")) {
      const auto& m = j.at("mechanics");
      check_keys(m, "mechanics", {"youngs_modulus_pa", "max_depth_mm", "max_force_n", "effective_area_mm2"});
      read(m, "youngs_modulus_pa", c.youngs_modulus_pa);
      read(m, "max_depth_mm", c.max_depth_mm);
      read(m, "max_force_n", c.max_force_n);
      read(m, "effective_area_mm2", c.effective_area_mm2);
    }
    if (j.contains("optics")) {
      const auto& o = j.at("optics");
      check_keys(o, "optics",
                 {"source_intensity", "beam_spot_mm", "absorption_gain", "reflection_gain", "contact_radius_mm",
                  "noise_sigma", "seed"});
      read(o, "source_intensity", c.optics.source_intensity);
      read(o, "beam_spot_mm", c.optics.beam_spot_mm);
      read(o, "absorption_gain", c.optics.absorption_gain);
      read(o, "reflection_gain", c.optics.reflection_gain);
      read(o, "contact_radius_mm", c.optics.contact_radius_mm);
      read(o, "noise_sigma", c.optics.noise_sigma);
      read(o, "seed", c.optics.seed);
    }
    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      check_keys(f, "frame", {"width", "height", "disc_radius", "disc_spacing"});
      read(f, "width", c.frame_width);
      read(f, "height", c.frame_height);
      read(f, "disc_radius", c.disc_radius);
      read(f, "disc_spacing", c.disc_spacing);
    }
    if (j.contains("roi")) {
      const auto& r = j.at("roi");
      check_keys(r, "roi", {"width", "height", "black_threshold"});
      read(r, "width", c.roi_width);
      read(r, "height", c.roi_height);
      read(r, "black_threshold", c.black_threshold);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      check_keys(s, "sweep", {"n_trials", "samples_per_state", "depth_levels", "drift_sigma"});
      read(s, "n_trials", c.sweep.n_trials);
      read(s, "samples_per_state", c.sweep.samples_per_state);
      read(s, "depth_levels", c.sweep.depth_levels);
      read(s, "drift_sigma", c.sweep.drift_sigma);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const Config& c) {
  json edges = json::object();
  for (Color col : {Color::red, Color::green, Color::blue})
    edges[std::string(to_string(col))] = std::string(to_string(c.geometry.emitter_edges[static_cast<int>(col)]));
  json mechanics = {{"youngs_modulus_pa", c.youngs_modulus_pa}, {"max_depth_mm", c.max_depth_mm}};
  if (c.effective_area_mm2 > 0)
    mechanics["effective_area_mm2"] = c.effective_area_mm2;
  else
    mechanics["max_force_n"] = c.max_force_n;
  return {
      {"geometry",
       {{"slab_width_mm", c.geometry.slab_width_mm},
        {"slab_height_mm", c.geometry.slab_height_mm},
        {"slab_thickness_mm", c.geometry.slab_thickness_mm},
        {"receiver_pitch_mm", c.geometry.receiver_pitch_mm},
        {"emitter_edges", edges}}},
      {"grid", {{"pitch_mm", c.grid.pitch_mm}, {"origin_mm", {c.grid.origin.x, c.grid.origin.y}}}},
      {"mechanics", mechanics},
      {"optics",
       {{"source_intensity", c.optics.source_intensity},
        {"beam_spot_mm", c.optics.beam_spot_mm},
        {"absorption_gain", c.optics.absorption_gain},
        {"reflection_gain", c.optics.reflection_gain},
        {"contact_radius_mm", c.optics.contact_radius_mm},
        {"noise_sigma", c.optics.noise_sigma},
        {"seed", c.optics.seed}}},
      {"frame",
       {{"width", c.frame_width}, {"height", c.frame_height}, {"disc_radius", c.disc_radius},
        {"disc_spacing", c.disc_spacing}}},
      {"roi", {{"width", c.roi_width}, {"height", c.roi_height}, {"black_threshold", c.black_threshold}}},
      {"sweep",
       {{"n_trials", c.sweep.n_trials},
        {"samples_per_state", c.sweep.samples_per_state},
        {"depth_levels", c.sweep.depth_levels},
        {"drift_sigma", c.sweep.drift_sigma}}},
  };
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const Config& config) { return fnv1a64(config_to_json(config).dump()); }

}  // namespace colortac
