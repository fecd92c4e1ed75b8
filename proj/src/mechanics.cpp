#include "colortac/mechanics.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "colortac/errors.hpp"
#include "csv.hpp"

namespace colortac {

namespace {

constexpr double kPascalToNPerMm2 = 1e-6;

}  // namespace

MechanicsParams MechanicsParams::calibrated(double youngs_modulus_pa, double slab_thickness_mm,
                                            double max_force_n, double max_depth_mm) {
  MechanicsParams p;
  p.youngs_modulus_pa = youngs_modulus_pa;
  p.slab_thickness_mm = slab_thickness_mm;
  p.max_depth_mm = max_depth_mm;
  p.effective_area_mm2 =
      effective_area_from_calibration(youngs_modulus_pa, slab_thickness_mm, max_force_n, max_depth_mm);
  p.stiffness_n_per_mm = max_force_n / max_depth_mm;
  p.validate();
  return p;
}

MechanicsParams MechanicsParams::from_area(double youngs_modulus_pa, double slab_thickness_mm,
                                           double effective_area_mm2, double max_depth_mm) {
  MechanicsParams p;
  p.youngs_modulus_pa = youngs_modulus_pa;
  p.slab_thickness_mm = slab_thickness_mm;
  p.effective_area_mm2 = effective_area_mm2;
  p.max_depth_mm = max_depth_mm;
  p.stiffness_n_per_mm = youngs_modulus_pa * kPascalToNPerMm2 * effective_area_mm2 / slab_thickness_mm;
  p.validate();
  return p;
}

void MechanicsParams::validate() const {
  if (!(youngs_modulus_pa > 0 && slab_thickness_mm > 0 && effective_area_mm2 > 0 && max_depth_mm > 0))
    throw DomainError("mechanics parameters E, D, A and max depth must be positive");
  const double expected = youngs_modulus_pa * kPascalToNPerMm2 * effective_area_mm2 / slab_thickness_mm;
  if (std::abs(stiffness_n_per_mm - expected) > 1e-9 * expected)
    throw DomainError("stiffness inconsistent with E*A/D");
}

double force_from_depth(const MechanicsParams& params, double depth_mm) {
  if (!(depth_mm >= 0.0) || depth_mm > params.max_depth_mm)
    throw RangeError(fmt::format("depth {} mm outside [0, {}] mm", depth_mm, params.max_depth_mm));
  return params.stiffness_n_per_mm * depth_mm;
}

double effective_area_from_calibration(double youngs_modulus_pa, double slab_thickness_mm,
                                       double max_force_n, double max_depth_mm) {
  if (!(youngs_modulus_pa > 0 && slab_thickness_mm > 0 && max_depth_mm > 0) || !(max_force_n >= 0))
    throw DomainError("calibration requires E, D, d_max > 0 and F_max >= 0");
  return max_force_n * slab_thickness_mm / (youngs_modulus_pa * kPascalToNPerMm2 * max_depth_mm);
}

ForceCurve::ForceCurve(std::vector<ForceSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].force_n >= 0.0)) throw DomainError("force curve has a negative force");
    if (i > 0 && !(samples_[i].depth_mm > samples_[i - 1].depth_mm))
      throw DomainError("force curve depths must be strictly increasing");
  }
}

double ForceCurve::integral() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < samples_.size(); ++i)
    sum += 0.5 * (samples_[i].force_n + samples_[i - 1].force_n) *
           (samples_[i].depth_mm - samples_[i - 1].depth_mm);
  return sum;
}

double hysteresis_area(const ForceCurve& loading, const ForceCurve& unloading) {
  if (loading.size() < 2 || unloading.size() < 2)
    throw DomainError("hysteresis needs at least two samples per curve");
  const double span = loading.max_depth() - loading.min_depth();
  const double tol = 1e-9 * std::max(1.0, span);
  if (std::abs(loading.min_depth() - unloading.min_depth()) > tol ||
      std::abs(loading.max_depth() - unloading.max_depth()) > tol)
    throw DomainError("loading and unloading curves span different depth ranges");
  return loading.integral() - unloading.integral();
}

ForceCurve loading_curve(const MechanicsParams& params, int n) {
  if (n < 2) throw DomainError("curve needs at least two samples");
  std::vector<ForceSample> s(n);
  for (int i = 0; i < n; ++i) {
    const double d = i == n - 1 ? params.max_depth_mm : params.max_depth_mm * i / (n - 1);
    s[i] = {d, force_from_depth(params, d)};
  }
  return ForceCurve(std::move(s));
}

ForceCurve unloading_curve(const MechanicsParams& params, int n, double exponent) {
  if (n < 2) throw DomainError("curve needs at least two samples");
  if (!(exponent > 0)) throw DomainError("unloading exponent must be positive");
  const double f_max = force_from_depth(params, params.max_depth_mm);
  std::vector<ForceSample> s(n);
  for (int i = 0; i < n; ++i) {
    const double d = i == n - 1 ? params.max_depth_mm : params.max_depth_mm * i / (n - 1);
    s[i] = {d, f_max * std::pow(d / params.max_depth_mm, exponent)};
  }
  return ForceCurve(std::move(s));
}

double unloading_exponent_for_area(const MechanicsParams& params, double target_area) {
  // Area = W/2 - W/(p+1) with W = F_max*d_max, so p is defined for 0 < area < W/2.
  const double work = force_from_depth(params, params.max_depth_mm) * params.max_depth_mm;
  if (!(target_area > 0) || !(target_area < work / 2))
    throw DomainError("target hysteresis area must lie in (0, F_max*d_max/2)");
  return work / (work / 2 - target_area) - 1.0;
}

void write_force_curve_csv(std::ostream& out, const ForceCurve& curve) {
  out << "depth_mm,force_N\n";
  for (const auto& s : curve.samples()) out << fmt::format("{:.17g},{:.17g}\n", s.depth_mm, s.force_n);
}

ForceCurve read_force_curve_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty force curve file", 0);
  ++line_no;
  if (csv::trim_cr(line) != "depth_mm,force_N") throw ParseError("expected header 'depth_mm,force_N'", line_no);
  std::vector<ForceSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = csv::split(csv::trim_cr(line));
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 2) throw ParseError("expected 2 columns", line_no);
    samples.push_back({csv::parse_double(fields[0], line_no), csv::parse_double(fields[1], line_no)});
  }
  try {
    return ForceCurve(std::move(samples));
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
}

void save_force_curve(const ForceCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_force_curve_csv(out, curve);
}

ForceCurve load_force_curve(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_force_curve_csv(in);
}

}  // namespace colortac
