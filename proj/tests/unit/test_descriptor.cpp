#include "doctest.h"

#include <algorithm>
#include <random>

#include "colortac/descriptor.hpp"
#include "colortac/errors.hpp"

using namespace colortac;

namespace {

void fill(Frame& f, const Roi& roi, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = roi.y0; y < roi.y0 + roi.height; ++y)
    for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
      auto* px = f.pixel(x, y);
      px[0] = r;
      px[1] = g;
      px[2] = b;
    }
}

Frame lit_frame(const RoiSpec& spec) {
  Frame f(640, 480);
  for (const auto& roi : spec.rois) fill(f, roi, 40, 40, 40);
  return f;
}

}  // namespace

TEST_CASE("uniform and half-black ROIs") {
  const auto spec = RoiSpec::around(FrameSpec::grid());
  auto f = lit_frame(spec);
  fill(f, spec.rois[2], 255, 0, 0);
  auto half = spec.rois[6];
  fill(f, half, 0, 0, 0);
  half.height /= 2;
  fill(f, half, 128, 64, 32);

  const auto v = extract_roi_means(f, spec);
  CHECK(v[6] == 1.0);
  CHECK(v[7] == 0.0);
  CHECK(v[8] == 0.0);
  CHECK(v[18] == 128.0 / 255.0);
  CHECK(v[19] == 64.0 / 255.0);
  CHECK(v[20] == 32.0 / 255.0);
}

TEST_CASE("black threshold uses the brightest channel") {
  const auto spec = RoiSpec::around(FrameSpec::grid());
  auto f = lit_frame(spec);
  auto top = spec.rois[0];
  fill(f, top, 10, 10, 10);  // black at threshold 10
  top.height = 1;
  fill(f, top, 11, 0, 0);  // not black
  const auto v = extract_roi_means(f, spec);
  CHECK(v[0] == 11.0 / 255.0);
  CHECK(v[1] == 0.0);
}

TEST_CASE("fully black ROI names its index") {
  const auto spec = RoiSpec::around(FrameSpec::grid());
  auto f = lit_frame(spec);
  fill(f, spec.rois[5], 3, 7, 1);
  try {
    extract_roi_means(f, spec);
    FAIL("expected EmptyRoiError");
  } catch (const EmptyRoiError& e) {
    CHECK(e.roi() == 5);
  }
  CHECK_THROWS_AS(extract_roi_means(Frame(640, 480), spec), EmptyRoiError);
}

TEST_CASE("ROI layout errors") {
  auto spec = RoiSpec::around(FrameSpec::grid());
  spec.rois[8].x0 = 630;
  CHECK_THROWS_AS(extract_roi_means(Frame(640, 480), spec), ConfigError);
  auto overlap = RoiSpec::around(FrameSpec::grid());
  overlap.rois[1] = overlap.rois[0];
  CHECK_THROWS_AS(overlap.validate(640, 480), ConfigError);
  auto thr = RoiSpec::around(FrameSpec::grid());
  thr.black_threshold = 256;
  CHECK_THROWS_AS(thr.validate(640, 480), ConfigError);
}

TEST_CASE("render then extract recovers each channel within 1/255") {
  const auto frame_spec = FrameSpec::grid();
  const auto spec = RoiSpec::around(frame_spec);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    ReceiverResponse r;
    for (int j = 0; j < kReceivers; ++j) {
      for (int c = 0; c < kChannels; ++c) r.at(j, c) = u(rng);
      r.at(j, t % 3) = std::max(r.at(j, t % 3), 0.1);  // keep every disc above the black threshold
    }
    const auto v = extract_roi_means(render_frame(r, frame_spec), spec);
    for (int i = 0; i < kFeatures; ++i) CHECK(std::abs(v[i] - r.values[i]) <= 1.0 / 255.0);
  }
}

TEST_CASE("invariance to pixel permutation and black padding") {
  const auto frame_spec = FrameSpec::grid();
  const auto spec = RoiSpec::around(frame_spec);
  ReceiverResponse r;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (double& v : r.values) v = u(rng);
  Frame f = render_frame(r, frame_spec);
  const auto ref = extract_roi_means(f, spec);
  CHECK(extract_roi_means(f, spec) == ref);

  // Shuffle the pixels inside each ROI.
  Frame shuffled = f;
  for (const auto& roi : spec.rois) {
    std::vector<std::array<std::uint8_t, 3>> px;
    for (int y = roi.y0; y < roi.y0 + roi.height; ++y)
      for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
        const auto* p = f.pixel(x, y);
        px.push_back({p[0], p[1], p[2]});
      }
    std::shuffle(px.begin(), px.end(), rng);
    std::size_t k = 0;
    for (int y = roi.y0; y < roi.y0 + roi.height; ++y)
      for (int x = roi.x0; x < roi.x0 + roi.width; ++x, ++k) std::copy(px[k].begin(), px[k].end(), shuffled.pixel(x, y));
  }
  CHECK_FALSE(shuffled == f);
  CHECK(extract_roi_means(shuffled, spec) == ref);

  // Grow every ROI over black background.
  for (int size : {42, 50, 60, 78}) CHECK(extract_roi_means(f, RoiSpec::around(frame_spec, size, size)) == ref);

  // Dark but non-zero noise below the threshold is black too.
  Frame speckled = f;
  for (std::size_t i = 0; i < speckled.pixels.size(); ++i)
    if (speckled.pixels[i] == 0) speckled.pixels[i] = static_cast<std::uint8_t>(i % 11);
  CHECK(extract_roi_means(speckled, spec) == ref);
}

TEST_CASE("features_from_response") {
  CHECK(features_from_response(ReceiverResponse{}) == FeatureVector{});
  ReceiverResponse r;
  r.values[4] = 0.25;
  r.values[26] = 1.0;
  const auto v = features_from_response(r);
  CHECK(v[4] == 0.25);
  CHECK(v[26] == 1.0);
}
