#pragma once

#include <array>

#include "colortac/geometry.hpp"
#include "colortac/optics.hpp"

namespace colortac {

/// The 27 ROI means, receiver-major then (R, G, B), each in [0, 1].
using FeatureVector = std::array<double, kFeatures>;

/// Axis-aligned pixel rectangle [x0, x0 + width) x [y0, y0 + height).
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 40;
  int height = 40;

  static Roi centered(PixelPoint c, int width, int height) {
    return {c.x - width / 2, c.y - height / 2, width, height};
  }
};

struct RoiSpec {
  std::array<Roi, kReceivers> rois{};
  /// A pixel is black iff max(R, G, B) <= black_threshold.
  int black_threshold = 10;

  /// One w x h ROI centred on each disc of `frame`.
  static RoiSpec around(const FrameSpec& frame, int width = 40, int height = 40, int black_threshold = 10);

  /// Throws ConfigError if an ROI leaves the frame, two ROIs overlap, or the threshold is not 8-bit.
  void validate(int frame_width, int frame_height) const;
};

/// Mean of the non-black pixels in each ROI, each channel divided by 255.
/// Throws EmptyRoiError when an ROI has no non-black pixel.
FeatureVector extract_roi_means(const Frame& frame, const RoiSpec& spec);

/// Same ordering and scale as extract_roi_means on a rendered frame, without quantization.
FeatureVector features_from_response(const ReceiverResponse& response);

}  // namespace colortac
