#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "colortac/geometry.hpp"

namespace colortac {

/// Parameters of the forward optical model.
///
/// Each emitter-receiver pair carries I0*exp(-2 r^2 / w^2) at rest. Under a
/// contact of depth d the pair is scaled by
///   exp(-absorption * d * g_seg) * (1 + reflection * d * g_rec)
/// where g_seg is a Gaussian kernel (width `contact_radius_mm`) of the
/// contact's distance to the emitter->receiver segment and g_rec the same
/// kernel of its distance to the receiver.
struct OpticsParams {
  double source_intensity = 1.0;
  double beam_spot_mm = 20.0;
  double absorption_gain = 0.5;   // per mm
  double reflection_gain = 0.3;   // per mm
  double contact_radius_mm = 10.0;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-receiver RGB intensities in [0, 1], receiver-major: index = 3*receiver + channel.
struct ReceiverResponse {
  std::array<double, kFeatures> values{};

  double& at(int receiver, int channel) { return values[kChannels * receiver + channel]; }
  double at(int receiver, int channel) const { return values[kChannels * receiver + channel]; }

  friend bool operator==(const ReceiverResponse&, const ReceiverResponse&) = default;
};

struct PixelPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Layout of the synthetic camera image: one filled disc per receiver.
struct FrameSpec {
  int width = 640;
  int height = 480;
  int disc_radius = 18;
  std::array<PixelPoint, kReceivers> disc_centers{};

  /// Discs on a 3x3 grid around the image centre, `spacing` pixels apart.
  /// Slab +y maps to image up, so receiver row 0 is the bottom image row.
  static FrameSpec grid(int width = 640, int height = 480, int disc_radius = 18, int spacing = 80);

  /// Throws ConfigError if a disc leaves the frame or two discs overlap.
  void validate() const;
};

/// 8-bit RGB image, row-major, interleaved.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* pixel(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

double gaussian_intensity(double r_mm, const OpticsParams& params);

/// Rest-state response: each channel sums its emitter's contributions, clamped to [0, 1].
ReceiverResponse baseline_response(const SensorGeometry& geometry, const OpticsParams& params);

/// Response under a contact of `depth_mm` in [0, 3] at `position`; d = 0 gives the baseline.
ReceiverResponse deformed_response(const SensorGeometry& geometry, const OpticsParams& params, Point2 position,
                                   double depth_mm);
/// Validates the contact's location and level, then evaluates at its position and depth.
ReceiverResponse deformed_response(const SensorGeometry& geometry, const OpticsParams& params,
                                   const ContactState& contact);

/// Zero-mean Gaussian perturbation per channel, clamped to [0, 1].
/// The generator is seeded from `seed` alone, so equal inputs give equal outputs.
ReceiverResponse add_noise(const ReceiverResponse& response, double sigma, std::uint64_t seed);

/// Black frame with one disc per receiver colored round(channel * 255).
Frame render_frame(const ReceiverResponse& response, const FrameSpec& spec);

/// Binary PPM (P6, maxval 255).
void write_ppm(std::ostream& out, const Frame& frame);
Frame read_ppm(std::istream& in);
void save_ppm(const Frame& frame, const std::filesystem::path& path);
Frame load_ppm(const std::filesystem::path& path);

}  // namespace colortac

namespace colortac {

/// Responses as CSV rows with header `f00,...,f26`, values at 17 significant digits.
void write_response_csv(std::ostream& out, const std::vector<ReceiverResponse>& responses);
/// Values must lie in [0, 1].
std::vector<ReceiverResponse> read_response_csv(std::istream& in);

}  // namespace colortac
