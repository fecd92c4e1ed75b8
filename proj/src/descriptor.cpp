#include "colortac/descriptor.hpp"

#include <algorithm>
#include <string>

#include "colortac/errors.hpp"

namespace colortac {

RoiSpec RoiSpec::around(const FrameSpec& frame, int width, int height, int black_threshold) {
  RoiSpec spec;
  for (int j = 0; j < kReceivers; ++j) spec.rois[j] = Roi::centered(frame.disc_centers[j], width, height);
  spec.black_threshold = black_threshold;
  spec.validate(frame.width, frame.height);
  return spec;
}

void RoiSpec::validate(int frame_width, int frame_height) const {
  if (black_threshold < 0 || black_threshold > 255) throw ConfigError("black threshold must lie in [0, 255]");
  for (int i = 0; i < kReceivers; ++i) {
    const Roi& a = rois[i];
    if (a.width <= 0 || a.height <= 0) throw ConfigError("ROI " + std::to_string(i) + " has empty extent");
    if (a.x0 < 0 || a.y0 < 0 || a.x0 + a.width > frame_width || a.y0 + a.height > frame_height)
      throw ConfigError("ROI " + std::to_string(i) + " lies outside the frame");
    for (int k = 0; k < i; ++k) {
      const Roi& b = rois[k];
      const bool disjoint =
          a.x0 + a.width <= b.x0 || b.x0 + b.width <= a.x0 || a.y0 + a.height <= b.y0 || b.y0 + b.height <= a.y0;
      if (!disjoint) throw ConfigError("ROIs " + std::to_string(k) + " and " + std::to_string(i) + " overlap");
    }
  }
}

FeatureVector extract_roi_means(const Frame& frame, const RoiSpec& spec) {
  spec.validate(frame.width, frame.height);
  FeatureVector out{};
  for (int j = 0; j < kReceivers; ++j) {
    const Roi& roi = spec.rois[j];
    std::array<std::uint64_t, kChannels> sum{};
    std::uint64_t count = 0;
    for (int y = roi.y0; y < roi.y0 + roi.height; ++y)
      for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
        const std::uint8_t* px = frame.pixel(x, y);
        if (std::max({px[0], px[1], px[2]}) <= spec.black_threshold) continue;
        for (int c = 0; c < kChannels; ++c) sum[c] += px[c];
        ++count;
      }
    if (count == 0) throw EmptyRoiError(j);
    // Integer sums keep the result independent of pixel order.
    for (int c = 0; c < kChannels; ++c)
      out[kChannels * j + c] = static_cast<double>(sum[c]) / (255.0 * static_cast<double>(count));
  }
  return out;
}

FeatureVector features_from_response(const ReceiverResponse& response) {
  FeatureVector out{};
  std::transform(response.values.begin(), response.values.end(), out.begin(),
                 [](double v) { return std::clamp(v, 0.0, 1.0); });
  return out;
}

}  // namespace colortac
