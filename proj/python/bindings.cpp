#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "colortac/classify.hpp"
#include "colortac/config.hpp"
#include "colortac/dataset.hpp"
#include "colortac/descriptor.hpp"
#include "colortac/errors.hpp"
#include "colortac/geometry.hpp"
#include "colortac/harness.hpp"
#include "colortac/hashing.hpp"
#include "colortac/mechanics.hpp"
#include "colortac/optics.hpp"

namespace py = pybind11;
using namespace colortac;

namespace {

std::vector<double> to_list(const ReceiverResponse& r) { return {r.values.begin(), r.values.end()}; }

ReceiverResponse from_list(const std::vector<double>& v) {
  if (v.size() != kFeatures) throw DomainError("a response has exactly 27 values");
  ReceiverResponse r;
  std::copy(v.begin(), v.end(), r.values.begin());
  return r;
}

FeatureVector to_features(const std::vector<double>& v) {
  if (v.size() != kFeatures) throw DomainError("a feature vector has exactly 27 values");
  FeatureVector f;
  std::copy(v.begin(), v.end(), f.begin());
  return f;
}

py::array_t<std::uint8_t> frame_to_array(const Frame& f) {
  py::array_t<std::uint8_t> a({f.height, f.width, 3});
  std::memcpy(a.mutable_data(), f.pixels.data(), f.pixels.size());
  return a;
}

Frame array_to_frame(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw DomainError("frame array must have shape (height, width, 3)");
  Frame f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(f.pixels.data(), a.data(), f.pixels.size());
  return f;
}

std::vector<ForceSample> to_samples(const std::vector<std::pair<double, double>>& pts) {
  std::vector<ForceSample> s;
  for (auto [d, f] : pts) s.push_back({d, f});
  return s;
}

LabelSelector selector_from(const std::string& kind, int location) {
  if (kind == "flat") return LabelSelector::flat();
  if (kind == "location") return LabelSelector::by_location();
  if (kind == "depth") return LabelSelector::depth_at(location);
  throw DomainError("selector must be flat, location or depth");
}

py::dict metrics_dict(const ClassMetrics& m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  d["correct"] = m.correct;
  d["total"] = m.total;
  d["labels"] = m.labels;
  d["per_class_accuracy"] = m.per_class_accuracy;
  d["confusion"] = m.confusion;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Color-coded optical tactile sensor simulator and classifiers";

  py::register_exception<RangeError>(m, "RangeError", PyExc_IndexError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EmptyRoiError>(m, "EmptyRoiError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.attr("N_FEATURES") = kFeatures;
  m.attr("N_LOCATIONS") = kLocations;
  m.attr("N_DEPTH_LEVELS") = kDepthLevels;
  m.attr("N_CLASSES") = kClasses;

  // geometry
  py::class_<SensorGeometry>(m, "SensorGeometry")
      .def_static("standard", &SensorGeometry::standard)
      .def_readonly("slab_width_mm", &SensorGeometry::slab_width_mm)
      .def_readonly("slab_height_mm", &SensorGeometry::slab_height_mm)
      .def_readonly("slab_thickness_mm", &SensorGeometry::slab_thickness_mm)
      .def_property_readonly("receivers", [](const SensorGeometry& g) {
        std::vector<std::pair<double, double>> out;
        for (auto p : g.receivers) out.emplace_back(p.x, p.y);
        return out;
      });
  py::class_<ContactGrid>(m, "ContactGrid").def(py::init<>()).def_readwrite("pitch_mm", &ContactGrid::pitch_mm);

  m.def("location_coords", [](int index, const ContactGrid& grid) {
    const auto p = location_coords(grid, index);
    return std::make_pair(p.x, p.y);
  }, py::arg("index"), py::arg("grid") = ContactGrid{});
  m.def("depth_of_level", &depth_of_level, py::arg("level"));
  m.def("class_index", &class_index, py::arg("location"), py::arg("depth_level"));
  m.def("split_class_index", [](int c) {
    const auto r = split_class_index(c);
    return std::make_pair(r.location, r.depth_level);
  });

  // mechanics
  py::class_<MechanicsParams>(m, "MechanicsParams")
      .def_static("standard", &MechanicsParams::standard)
      .def_static("calibrated", &MechanicsParams::calibrated, py::arg("youngs_modulus_pa"),
                  py::arg("slab_thickness_mm"), py::arg("max_force_n"), py::arg("max_depth_mm"))
      .def_readonly("youngs_modulus_pa", &MechanicsParams::youngs_modulus_pa)
      .def_readonly("effective_area_mm2", &MechanicsParams::effective_area_mm2)
      .def_readonly("stiffness_n_per_mm", &MechanicsParams::stiffness_n_per_mm)
      .def_readonly("max_depth_mm", &MechanicsParams::max_depth_mm);
  m.def("force_from_depth", &force_from_depth, py::arg("params"), py::arg("depth_mm"));
  m.def("effective_area_from_calibration", &effective_area_from_calibration);
  m.def("hysteresis_area",
        [](const std::vector<std::pair<double, double>>& loading, const std::vector<std::pair<double, double>>& unloading) {
          return hysteresis_area(ForceCurve(to_samples(loading)), ForceCurve(to_samples(unloading)));
        },
        py::arg("loading"), py::arg("unloading"));

  // optics
  py::class_<OpticsParams>(m, "OpticsParams")
      .def(py::init<>())
      .def_readwrite("source_intensity", &OpticsParams::source_intensity)
      .def_readwrite("beam_spot_mm", &OpticsParams::beam_spot_mm)
      .def_readwrite("absorption_gain", &OpticsParams::absorption_gain)
      .def_readwrite("reflection_gain", &OpticsParams::reflection_gain)
      .def_readwrite("contact_radius_mm", &OpticsParams::contact_radius_mm)
      .def_readwrite("noise_sigma", &OpticsParams::noise_sigma)
      .def_readwrite("seed", &OpticsParams::seed);
  py::class_<FrameSpec>(m, "FrameSpec")
      .def_static("grid", &FrameSpec::grid, py::arg("width") = 640, py::arg("height") = 480,
                  py::arg("disc_radius") = 18, py::arg("spacing") = 80)
      .def_readonly("width", &FrameSpec::width)
      .def_readonly("height", &FrameSpec::height);
  py::class_<RoiSpec>(m, "RoiSpec")
      .def_static("around", &RoiSpec::around, py::arg("frame"), py::arg("width") = 40, py::arg("height") = 40,
                  py::arg("black_threshold") = 10)
      .def_readwrite("black_threshold", &RoiSpec::black_threshold);

  m.def("gaussian_intensity", &gaussian_intensity, py::arg("r_mm"), py::arg("params") = OpticsParams{});
  m.def("baseline_response", [](const SensorGeometry& g, const OpticsParams& p) { return to_list(baseline_response(g, p)); },
        py::arg("geometry") = SensorGeometry::standard(), py::arg("params") = OpticsParams{});
  m.def("deformed_response",
        [](int location, int level, const SensorGeometry& g, const OpticsParams& p, const ContactGrid& grid) {
          return to_list(deformed_response(g, p, ContactState::make(grid, location, level)));
        },
        py::arg("location"), py::arg("depth_level"), py::arg("geometry") = SensorGeometry::standard(),
        py::arg("params") = OpticsParams{}, py::arg("grid") = ContactGrid{});
  m.def("add_noise", [](const std::vector<double>& r, double sigma, std::uint64_t seed) {
    return to_list(add_noise(from_list(r), sigma, seed));
  }, py::arg("response"), py::arg("sigma"), py::arg("seed"));
  m.def("render_frame", [](const std::vector<double>& r, const FrameSpec& spec) {
    return frame_to_array(render_frame(from_list(r), spec));
  }, py::arg("response"), py::arg("spec") = FrameSpec::grid());

  // descriptor
  m.def("extract_roi_means",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& frame, const RoiSpec& spec) {
          const auto f = extract_roi_means(array_to_frame(frame), spec);
          return std::vector<double>(f.begin(), f.end());
        },
        py::arg("frame"), py::arg("spec") = RoiSpec::around(FrameSpec::grid()));
  m.def("features_from_response", [](const std::vector<double>& r) {
    const auto f = features_from_response(from_list(r));
    return std::vector<double>(f.begin(), f.end());
  });

  // dataset
  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_readonly("n_trials", &Dataset::n_trials)
      .def_readonly("samples_per_state", &Dataset::samples_per_state)
      .def("trials", &Dataset::trials)
      .def("class_counts", &Dataset::class_counts)
      .def("features", [](const Dataset& d) {
        py::array_t<float> a({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(kFeatures)});
        auto* out = a.mutable_data();
        for (const auto& s : d.samples) out = std::copy(s.features.begin(), s.features.end(), out);
        return a;
      })
      .def("labels", [](const Dataset& d) {
        py::array_t<std::int32_t> a({static_cast<py::ssize_t>(d.size()), py::ssize_t{3}});
        auto* out = a.mutable_data();
        for (const auto& s : d.samples) {
          *out++ = s.trial;
          *out++ = s.location;
          *out++ = s.depth_level;
        }
        return a;
      })
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_dataset(d, p); })
      .def_static("load", &load_dataset)
      .def("hash", [](const Dataset& d) { return hex64(dataset_hash(d)); });

  m.def("generate_sweep",
        [](std::uint64_t seed, double noise_sigma, int n_trials, int samples_per_state, double drift_sigma) {
          OpticsParams optics;
          optics.noise_sigma = noise_sigma;
          SweepSpec spec;
          spec.n_trials = n_trials;
          spec.samples_per_state = samples_per_state;
          spec.drift_sigma = drift_sigma;
          py::gil_scoped_release release;
          return generate_sweep(SensorGeometry::standard(), ContactGrid{}, optics, spec, seed);
        },
        py::arg("seed") = 0, py::arg("noise_sigma") = 0.01, py::arg("n_trials") = 27,
        py::arg("samples_per_state") = 10, py::arg("drift_sigma") = 0.0);

  // classify
  py::class_<FlatModel>(m, "FlatModel")
      .def_property_readonly("method", [](const FlatModel& f) { return std::string(to_string(f.method())); })
      .def_property_readonly("labels", &FlatModel::labels)
      .def("predict", [](const FlatModel& f, const std::vector<double>& x) { return f.predict(x); })
      .def("to_json", [](const FlatModel& f) { return f.to_json().dump(); });
  py::class_<HierarchicalModel>(m, "HierarchicalModel")
      .def("predict", [](const HierarchicalModel& h, const std::vector<double>& x) {
        const auto r = h.predict(x);
        return std::make_pair(r.location, r.depth_level);
      })
      .def("to_json", [](const HierarchicalModel& h) { return h.to_json().dump(); });

  m.def("split_by_trial", [](const Dataset& d, int n_train, std::uint64_t seed) {
    auto s = split_by_trial(d, n_train, seed);
    return py::make_tuple(std::move(s.train), std::move(s.test));
  }, py::arg("dataset"), py::arg("n_train") = 20, py::arg("seed") = 0);
  m.def("train",
        [](const std::string& method, const Dataset& d, const std::string& selector, int location, std::uint64_t seed) {
          TrainOptions opt;
          opt.seed = seed;
          py::gil_scoped_release release;
          return train(method_from_string(method), d, selector_from(selector, location), opt);
        },
        py::arg("method"), py::arg("dataset"), py::arg("selector") = "flat", py::arg("location") = -1,
        py::arg("seed") = 0);
  m.def("train_hierarchical",
        [](const Dataset& d, const std::string& method, std::uint64_t seed) {
          TrainOptions opt;
          opt.seed = seed;
          py::gil_scoped_release release;
          return train_hierarchical(d, method_from_string(method), opt);
        },
        py::arg("dataset"), py::arg("method") = "knn", py::arg("seed") = 0);
  m.def("evaluate", [](const FlatModel& f, const Dataset& d) { return metrics_dict(evaluate(f, d)); });
  m.def("evaluate_hierarchical", [](const HierarchicalModel& h, const Dataset& d) {
    const auto r = evaluate(h, d);
    py::dict out;
    out["location_accuracy"] = r.location_accuracy;
    out["depth_accuracy"] = r.depth_accuracy;
    out["combined_accuracy"] = r.combined_accuracy;
    out["total"] = r.total;
    out["location_correct"] = r.location_correct;
    out["both_correct"] = r.both_correct;
    return out;
  });
  m.def("cross_validate",
        [](const Dataset& d, const std::string& method, int folds, std::uint64_t seed, const std::string& mode) {
          py::gil_scoped_release release;
          const auto cv = cross_validate(d, method_from_string(method), folds, seed, mode_from_string(mode));
          return std::make_pair(cv.mean_accuracy, cv.fold_accuracies);
        },
        py::arg("dataset"), py::arg("method"), py::arg("folds") = 5, py::arg("seed") = 0, py::arg("mode") = "flat");
  m.def("_train_eval_json",
        [](const Dataset& d, const std::vector<std::string>& methods, const std::string& mode, std::uint64_t seed,
           int train_trials, int folds) {
          TrainEvalOptions opt;
          for (const auto& name : methods) opt.methods.push_back(method_from_string(name));
          opt.mode = mode_from_string(mode);
          opt.seed = seed;
          opt.train_trials = train_trials;
          opt.folds = folds;
          py::gil_scoped_release release;
          return run_train_eval(d, opt, dataset_hash(d), config_hash(Config{})).to_json().dump();
        });
}
