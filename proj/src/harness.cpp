#include "colortac/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "colortac/errors.hpp"
#include "colortac/hashing.hpp"

namespace colortac {

using nlohmann::json;

namespace {

Config resolve_config(const std::optional<std::filesystem::path>& path) {
  return path ? load_config(*path) : Config{};
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Same digits the JSON report uses, so text and JSON agree exactly.
std::string num(double v) { return json(v).dump(); }

std::string join(const std::vector<int>& v) {
  return fmt::format("{}", fmt::join(v, " "));
}

/// Runs `body`, mapping every error to a message on `err` and exit code 1.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const EmptyRoiError& e) {
    err << "error: empty ROI: " << e.what() << '\n';
  } catch (const ParseError& e) {
    err << "error: parse error: " << e.what() << '\n';
  } catch (const ValidationError& e) {
    err << "error: validation error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config config = resolve_config(options.config);
    const Dataset data =
        generate_sweep(config.sensor(), config.grid, config.optics, config.sweep, options.seed);
    save_dataset(data, options.out);
    const auto counts = data.class_counts();
    int per_class = 0;
    for (int c : counts) per_class = std::max(per_class, c);
    out << fmt::format("{} samples, {} per class\n", data.size(), per_class);
    out << fmt::format("wrote {} (config {}, seed {})\n", options.out.string(), hex64(config_hash(config)),
                       options.seed);
    return 0;
  });
}

// ---------------------------------------------------------------------------

json TrainEvalReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    json row = {{"method", to_string(r.method)},
                {"cv_accuracy", r.cv.mean_accuracy},
                {"cv_fold_accuracies", r.cv.fold_accuracies},
                {"generalization_accuracy", r.generalization_accuracy}};
    if (r.hierarchical) {
      row["location_accuracy"] = r.hierarchical->location_accuracy;
      row["depth_accuracy"] = r.hierarchical->depth_accuracy;
      row["combined_accuracy"] = r.hierarchical->combined_accuracy;
      row["test_samples"] = r.hierarchical->total;
      row["location_correct"] = r.hierarchical->location_correct;
      row["both_correct"] = r.hierarchical->both_correct;
    }
    rows_json.push_back(std::move(row));
  }
  return {{"mode", to_string(mode)},
          {"seed", seed},
          {"config_hash", config_hash},
          {"dataset_hash", dataset_hash},
          {"dataset_samples", dataset_samples},
          {"folds", folds},
          {"train_trials", train_trials},
          {"test_trials", test_trials},
          {"rows", std::move(rows_json)}};
}

std::string TrainEvalReport::to_text() const {
  std::ostringstream s;
  s << fmt::format("mode: {}  seed: {}  folds: {}\n", to_string(mode), seed, folds);
  s << fmt::format("config hash: {}  dataset hash: {}  samples: {}\n", config_hash, dataset_hash, dataset_samples);
  s << fmt::format("train trials: {}\n", join(train_trials));
  s << fmt::format("test trials: {}\n\n", join(test_trials));
  if (mode == Mode::flat) {
    s << fmt::format("{:<8}{:>24}{:>24}\n", "method", "cv_accuracy", "generalization_accuracy");
    for (const auto& r : rows)
      s << fmt::format("{:<8}{:>24}{:>24}\n", to_string(r.method), num(r.cv.mean_accuracy),
                       num(r.generalization_accuracy));
  } else {
    s << fmt::format("{:<8}{:>24}{:>24}{:>24}{:>24}{:>24}\n", "method", "cv_accuracy", "generalization_accuracy",
                     "location_accuracy", "depth_accuracy", "combined_accuracy");
    for (const auto& r : rows)
      s << fmt::format("{:<8}{:>24}{:>24}{:>24}{:>24}{:>24}\n", to_string(r.method), num(r.cv.mean_accuracy),
                       num(r.generalization_accuracy), num(r.hierarchical->location_accuracy),
                       num(r.hierarchical->depth_accuracy), num(r.hierarchical->combined_accuracy));
  }
  return s.str();
}

TrainEvalReport run_train_eval(const Dataset& dataset, const TrainEvalOptions& options, std::uint64_t dataset_hash,
                               std::uint64_t config_hash, json* model_sink) {
  TrainEvalReport report;
  report.mode = options.mode;
  report.seed = options.seed;
  report.config_hash = hex64(config_hash);
  report.dataset_hash = hex64(dataset_hash);
  report.dataset_samples = dataset.size();
  report.folds = options.folds;

  const TrialSplit split = split_by_trial(dataset, options.train_trials, options.seed);
  report.train_trials = split.train_trials;
  report.test_trials = split.test_trials;

  TrainOptions train_options = options.train;
  train_options.seed = options.seed;
  const auto methods = options.methods.empty() ? std::vector<Method>(kAllMethods.begin(), kAllMethods.end())
                                               : options.methods;
  if (model_sink) *model_sink = json::array();
  for (Method method : methods) {
    MethodResult row;
    row.method = method;
    row.cv = cross_validate(split.train, method, options.folds, options.seed, options.mode, train_options);
    if (options.mode == Mode::flat) {
      const FlatModel model = train(method, split.train, LabelSelector::flat(), train_options)
                                  .with_metadata(options.seed, report.dataset_hash);
      row.generalization_accuracy = evaluate(model, split.test).accuracy;
      if (model_sink) model_sink->push_back(model.to_json());
    } else {
      const HierarchicalModel model = train_hierarchical(split.train, method, train_options);
      row.hierarchical = evaluate(model, split.test);
      row.generalization_accuracy = row.hierarchical->combined_accuracy;
      if (model_sink) {
        json j = model.to_json();
        j["metadata"] = {{"seed", options.seed}, {"dataset_hash", report.dataset_hash}};
        model_sink->push_back(std::move(j));
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

int cmd_train_eval(const TrainEvalOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.model_out && options.methods.size() != 1)
      throw DomainError("--model-out needs exactly one --method");
    const Config config = resolve_config(options.config);
    const std::string bytes = read_file_bytes(options.dataset);
    std::istringstream in(bytes);
    const Dataset data = read_dataset_csv(in);
    if (data.empty()) throw ValidationError("dataset has no samples");

    json models;
    const auto report = run_train_eval(data, options, fnv1a64(bytes), config_hash(config),
                                       options.model_out ? &models : nullptr);
    const std::string text = report.to_text();
    out << text;
    if (options.report_out) {
      std::ofstream json_out(*options.report_out, std::ios::binary);
      if (!json_out) throw std::runtime_error("cannot write " + options.report_out->string());
      json_out << report.to_json().dump(2) << '\n';
      auto text_path = *options.report_out;
      text_path.replace_extension(".txt");
      std::ofstream text_out(text_path, std::ios::binary);
      if (!text_out) throw std::runtime_error("cannot write " + text_path.string());
      text_out << text;
    }
    if (options.model_out) save_model(models.at(0), *options.model_out);
    return 0;
  });
}

// ---------------------------------------------------------------------------

Inference infer_features(const json& model, const FeatureVector& features, const MechanicsParams& mechanics) {
  const std::string kind = model.at("kind").get<std::string>();
  LocationDepth result;
  if (kind == "hierarchical") {
    result = HierarchicalModel::from_json(model).predict(features);
  } else if (kind == "flat") {
    const FlatModel flat = FlatModel::from_json(model);
    if (flat.labels().front() < 0 || flat.labels().back() >= kClasses)
      throw DomainError("flat model does not predict (location, depth) classes");
    result = split_class_index(flat.predict(features));
  } else {
    throw ParseError("unknown model kind '" + kind + "'", 0);
  }
  return {result.location, result.depth_level, force_from_depth(mechanics, depth_of_level(result.depth_level))};
}

int cmd_infer(const InferOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.frame.has_value() == options.response.has_value())
      throw DomainError("infer needs exactly one of --frame or --response");
    const Config config = resolve_config(options.config);
    const json model = load_model_json(options.model);
    std::vector<FeatureVector> inputs;
    if (options.frame) {
      inputs.push_back(extract_roi_means(load_ppm(*options.frame), config.rois()));
    } else {
      std::ifstream in(*options.response, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read " + options.response->string());
      for (const auto& r : read_response_csv(in)) inputs.push_back(features_from_response(r));
      if (inputs.empty()) throw ValidationError("response file has no rows");
    }
    const MechanicsParams mechanics = config.mechanics();
    for (const auto& f : inputs) {
      const auto r = infer_features(model, f, mechanics);
      out << fmt::format("location={} depth_level={} force_N={:.6g}\n", r.location, r.depth_level, r.force_n);
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------

int cmd_export_bars(const ExportBarsOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.locations.empty() || options.levels.empty())
      throw DomainError("export-bars needs at least one location and one level");
    const Dataset data = load_dataset(options.dataset);
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "location,depth_level");
    for (int f = 0; f < kFeatures; ++f) fmt::format_to(std::back_inserter(buf), ",f{:02d}", f);
    buf.push_back('\n');
    int rows = 0;
    for (int loc : options.locations)
      for (int lv : options.levels) {
        class_index(loc, lv);
        std::array<double, kFeatures> sum{};
        std::size_t n = 0;
        for (const auto& s : data.samples) {
          if (s.location != loc || s.depth_level != lv) continue;
          for (int f = 0; f < kFeatures; ++f) sum[f] += static_cast<double>(s.features[f]);
          ++n;
        }
        if (n == 0) throw ValidationError(fmt::format("dataset has no samples at location {} level {}", loc, lv));
        fmt::format_to(std::back_inserter(buf), "{},{}", loc, lv);
        for (double v : sum) fmt::format_to(std::back_inserter(buf), ",{:.9g}", v / static_cast<double>(n));
        buf.push_back('\n');
        ++rows;
      }
    std::ofstream file(options.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + options.out.string());
    file.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out << fmt::format("wrote {} rows to {}\n", rows, options.out.string());
    return 0;
  });
}

// ---------------------------------------------------------------------------

int cmd_render(const RenderOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config config = resolve_config(options.config);
    const auto contact = ContactState::make(config.grid, options.location, options.level);
    auto response = deformed_response(config.sensor(), config.optics, contact);
    response = add_noise(response, options.noise_sigma, options.seed);
    save_ppm(render_frame(response, config.frame()), options.out);
    if (options.response_out) {
      std::ofstream csv_out(*options.response_out, std::ios::binary);
      if (!csv_out) throw std::runtime_error("cannot write " + options.response_out->string());
      write_response_csv(csv_out, {response});
    }
    out << fmt::format("rendered location {} level {} to {}\n", options.location, options.level, options.out.string());
    return 0;
  });
}

}  // namespace colortac
