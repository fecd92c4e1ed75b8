#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace colortac {

/// Linear elastic model of the silicone slab, F = E*A*d/D.
///
/// Units: E in Pa, D and d in mm, A in mm^2, force in N. The stiffness
/// k_s = E*A/D is stored so that a calibrated model reproduces its
/// calibration endpoint exactly.
struct MechanicsParams {
  double youngs_modulus_pa = 5.9e6;
  double slab_thickness_mm = 5.0;
  double effective_area_mm2 = 0.0;
  double stiffness_n_per_mm = 0.0;
  double max_depth_mm = 3.0;

  /// Area solved from a known (d_max, F_max) endpoint; stiffness = F_max/d_max.
  static MechanicsParams calibrated(double youngs_modulus_pa, double slab_thickness_mm,
                                    double max_force_n, double max_depth_mm);
  static MechanicsParams from_area(double youngs_modulus_pa, double slab_thickness_mm,
                                   double effective_area_mm2, double max_depth_mm);
  /// 5.9 MPa, 5 mm slab, calibrated to 18 N at 3 mm.
  static MechanicsParams standard() { return calibrated(5.9e6, 5.0, 18.0, 3.0); }

  void validate() const;
};

double force_from_depth(const MechanicsParams& params, double depth_mm);

/// A = F_max*D / (E*d_max). F_max may be zero; everything else must be positive.
double effective_area_from_calibration(double youngs_modulus_pa, double slab_thickness_mm,
                                       double max_force_n, double max_depth_mm);

struct ForceSample {
  double depth_mm = 0.0;
  double force_n = 0.0;
};

/// Force-depth samples with strictly increasing depth and non-negative force.
class ForceCurve {
 public:
  ForceCurve() = default;
  explicit ForceCurve(std::vector<ForceSample> samples);

  std::span<const ForceSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double min_depth() const { return samples_.front().depth_mm; }
  double max_depth() const { return samples_.back().depth_mm; }

  /// Trapezoidal integral of force over depth, N*mm.
  double integral() const;

 private:
  std::vector<ForceSample> samples_;
};

/// Integral of (loading - unloading) over depth by the trapezoid rule on each
/// curve's own samples. Both curves must span the same depth interval.
double hysteresis_area(const ForceCurve& loading, const ForceCurve& unloading);

/// Linear loading curve of the model sampled at `n` evenly spaced depths on [0, d_max].
ForceCurve loading_curve(const MechanicsParams& params, int n);

/// Stand-in release curve F_max*(d/d_max)^p sharing the loading curve's endpoints.
ForceCurve unloading_curve(const MechanicsParams& params, int n, double exponent);

/// Exponent p for which the continuous hysteresis area between the linear
/// loading curve and unloading_curve equals `target_area`.
double unloading_exponent_for_area(const MechanicsParams& params, double target_area);

/// Two-column CSV with header `depth_mm,force_N`.
void write_force_curve_csv(std::ostream& out, const ForceCurve& curve);
ForceCurve read_force_curve_csv(std::istream& in);
void save_force_curve(const ForceCurve& curve, const std::filesystem::path& path);
ForceCurve load_force_curve(const std::filesystem::path& path);

}  // namespace colortac
