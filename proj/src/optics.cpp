#include "colortac/optics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "colortac/errors.hpp"

namespace colortac {

void OpticsParams::validate() const {
  if (!(source_intensity > 0)) throw ConfigError("source intensity must be positive");
  if (!(beam_spot_mm > 0)) throw ConfigError("beam spot must be positive");
  if (!(contact_radius_mm > 0)) throw ConfigError("contact influence radius must be positive");
  if (!(noise_sigma >= 0)) throw ConfigError("noise sigma must be non-negative");
  if (!(absorption_gain >= 0 && reflection_gain >= 0)) throw ConfigError("optical gains must be non-negative");
}

double gaussian_intensity(double r_mm, const OpticsParams& params) {
  if (!(r_mm >= 0)) throw DomainError("beam path length must be non-negative");
  return params.source_intensity * std::exp(-2.0 * r_mm * r_mm / (params.beam_spot_mm * params.beam_spot_mm));
}

namespace {

double contact_kernel(double dist, double radius) { return std::exp(-dist * dist / (2.0 * radius * radius)); }

void clamp_unit(ReceiverResponse& r) {
  for (double& v : r.values) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

ReceiverResponse baseline_response(const SensorGeometry& geometry, const OpticsParams& params) {
  ReceiverResponse out;
  for (int j = 0; j < kReceivers; ++j)
    for (const auto& e : geometry.emitters)
      out.at(j, static_cast<int>(e.color)) += gaussian_intensity(distance(e.position, geometry.receivers[j]), params);
  clamp_unit(out);
  return out;
}

ReceiverResponse deformed_response(const SensorGeometry& geometry, const OpticsParams& params,
                                   const ContactState& contact) {
  class_index(contact.location, contact.depth_level);
  return deformed_response(geometry, params, contact.position, contact.depth_mm);
}

ReceiverResponse deformed_response(const SensorGeometry& geometry, const OpticsParams& params, Point2 position,
                                   double depth_mm) {
  if (!(depth_mm >= 0.0) || depth_mm > kDepthStepMm * kDepthLevels + 1e-12)
    throw RangeError("contact depth outside [0, 3] mm");
  const double d = depth_mm;
  const Point2 c = position;
  ReceiverResponse out;
  for (int j = 0; j < kReceivers; ++j) {
    const Point2 rx = geometry.receivers[j];
    const double g_rec = contact_kernel(distance(c, rx), params.contact_radius_mm);
    for (const auto& e : geometry.emitters) {
      const double g_seg = contact_kernel(distance_to_segment(c, e.position, rx), params.contact_radius_mm);
      const double base = gaussian_intensity(distance(e.position, rx), params);
      out.at(j, static_cast<int>(e.color)) +=
          base * std::exp(-params.absorption_gain * d * g_seg) * (1.0 + params.reflection_gain * d * g_rec);
    }
  }
  clamp_unit(out);
  return out;
}

ReceiverResponse add_noise(const ReceiverResponse& response, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0)) throw DomainError("noise sigma must be non-negative");
  if (sigma == 0) return response;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  ReceiverResponse out = response;
  for (double& v : out.values) v = std::clamp(v + noise(rng), 0.0, 1.0);
  return out;
}

FrameSpec FrameSpec::grid(int width, int height, int disc_radius, int spacing) {
  FrameSpec spec;
  spec.width = width;
  spec.height = height;
  spec.disc_radius = disc_radius;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      spec.disc_centers[3 * row + col] = {width / 2 + (col - 1) * spacing, height / 2 - (row - 1) * spacing};
  spec.validate();
  return spec;
}

void FrameSpec::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("frame dimensions must be positive");
  if (disc_radius <= 0) throw ConfigError("disc radius must be positive");
  for (int i = 0; i < kReceivers; ++i) {
    const auto c = disc_centers[i];
    if (c.x - disc_radius < 0 || c.y - disc_radius < 0 || c.x + disc_radius >= width || c.y + disc_radius >= height)
      throw ConfigError("disc " + std::to_string(i) + " extends outside the frame");
    for (int k = 0; k < i; ++k) {
      const long dx = c.x - disc_centers[k].x;
      const long dy = c.y - disc_centers[k].y;
      if (dx * dx + dy * dy <= 4L * disc_radius * disc_radius)
        throw ConfigError("discs " + std::to_string(k) + " and " + std::to_string(i) + " overlap");
    }
  }
}

Frame render_frame(const ReceiverResponse& response, const FrameSpec& spec) {
  spec.validate();
  Frame frame(spec.width, spec.height);
  const int r = spec.disc_radius;
  for (int j = 0; j < kReceivers; ++j) {
    std::array<std::uint8_t, 3> rgb{};
    for (int c = 0; c < kChannels; ++c)
      rgb[c] = static_cast<std::uint8_t>(std::lround(std::clamp(response.at(j, c), 0.0, 1.0) * 255.0));
    const auto center = spec.disc_centers[j];
    for (int y = center.y - r; y <= center.y + r; ++y)
      for (int x = center.x - r; x <= center.x + r; ++x) {
        const int dx = x - center.x;
        const int dy = y - center.y;
        if (dx * dx + dy * dy > r * r) continue;
        std::copy(rgb.begin(), rgb.end(), frame.pixel(x, y));
      }
  }
  return frame;
}

void write_ppm(std::ostream& out, const Frame& frame) {
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
}

namespace {

int read_ppm_int(std::istream& in) {
  in >> std::ws;
  while (in.peek() == '#') {
    std::string comment;
    std::getline(in, comment);
    in >> std::ws;
  }
  int v = -1;
  if (!(in >> v)) throw ParseError("truncated PPM header", 0);
  return v;
}

}  // namespace

Frame read_ppm(std::istream& in) {
  std::string magic;
  if (!(in >> magic) || magic != "P6") throw ParseError("not a binary PPM (P6) image", 0);
  const int w = read_ppm_int(in);
  const int h = read_ppm_int(in);
  const int maxval = read_ppm_int(in);
  if (w <= 0 || h <= 0) throw ParseError("invalid PPM dimensions", 0);
  if (maxval != 255) throw ParseError("only 8-bit PPM images are supported", 0);
  in.get();  // single whitespace byte before the raster
  Frame frame(w, h);
  in.read(reinterpret_cast<char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.pixels.size())) throw ParseError("truncated PPM raster", 0);
  return frame;
}

void save_ppm(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_ppm(out, frame);
}

Frame load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_ppm(in);
}

}  // namespace colortac

#include <fmt/format.h>

#include "csv.hpp"

namespace colortac {

void write_response_csv(std::ostream& out, const std::vector<ReceiverResponse>& responses) {
  for (int f = 0; f < kFeatures; ++f) out << (f ? "," : "") << fmt::format("f{:02d}", f);
  out << '\n';
  for (const auto& r : responses) {
    for (int f = 0; f < kFeatures; ++f) out << (f ? "," : "") << fmt::format("{:.17g}", r.values[f]);
    out << '\n';
  }
}

std::vector<ReceiverResponse> read_response_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty response file", 0);
  if (csv::split(csv::trim_cr(line)).size() != kFeatures)
    throw ParseError(fmt::format("response header must have {} columns", kFeatures), line_no);
  std::vector<ReceiverResponse> out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = csv::trim_cr(line);
    if (row.empty()) continue;
    const auto fields = csv::split(row);
    if (fields.size() != kFeatures)
      throw ParseError(fmt::format("row has {} columns, expected {}", fields.size(), kFeatures), line_no);
    ReceiverResponse r;
    for (int f = 0; f < kFeatures; ++f) {
      r.values[f] = csv::parse_double(fields[f], line_no);
      if (!(r.values[f] >= 0.0 && r.values[f] <= 1.0))
        throw ValidationError(fmt::format("line {}: value outside [0, 1]", line_no));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace colortac
