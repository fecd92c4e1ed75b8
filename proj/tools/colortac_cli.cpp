// colortac: generate synthetic sweeps, train and evaluate classifiers, and run
// single-frame inference for the color-coded optical tactile sensor.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "colortac/harness.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace colortac;

  CLI::App app{"Color-coded optical tactile sensor simulator and classification pipeline"};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::string gen_config;
  auto* generate = app.add_subcommand("generate", "Simulate the 27x25x5 calibration sweep and write a dataset CSV");
  generate->add_option("--config", gen_config, "JSON configuration")->check(CLI::ExistingFile);
  generate->add_option("--seed", gen.seed, "Master seed")->default_val(0);
  generate->add_option("--out", gen.out, "Output dataset CSV")->required();

  TrainEvalOptions te;
  std::string te_config, te_out, te_model, te_method, te_mode = "flat";
  auto* train_eval = app.add_subcommand("train-eval", "Trial split, grouped CV and held-out evaluation");
  train_eval->add_option("--dataset", te.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train_eval->add_option("--config", te_config, "JSON configuration (hashed into the report)")->check(CLI::ExistingFile);
  train_eval->add_option("--method", te_method, "lda|qda|svm|knn (default: all four)")
      ->check(CLI::IsMember({"lda", "qda", "svm", "knn"}));
  train_eval->add_option("--mode", te_mode, "flat|hier")->check(CLI::IsMember({"flat", "hier", "hierarchical"}));
  train_eval->add_option("--seed", te.seed, "Seed for the split, folds and SVM shuffling")->default_val(0);
  train_eval->add_option("--train-trials", te.train_trials, "Trials used for training")->default_val(20);
  train_eval->add_option("--folds", te.folds, "Cross-validation folds")->default_val(5);
  train_eval->add_option("--k", te.train.k, "k-NN neighbours")->default_val(1);
  train_eval->add_option("--out", te_out, "JSON report path (text report written alongside as .txt)");
  train_eval->add_option("--model-out", te_model, "Write the final model JSON (single --method only)");

  InferOptions inf;
  std::string inf_frame, inf_response, inf_config;
  auto* infer = app.add_subcommand("infer", "Predict location, depth level and force for a frame or response CSV");
  infer->add_option("--model", inf.model, "Model JSON from train-eval --model-out")->required()->check(CLI::ExistingFile);
  auto* frame_opt = infer->add_option("--frame", inf_frame, "PPM (P6) frame")->check(CLI::ExistingFile);
  auto* resp_opt = infer->add_option("--response", inf_response, "27-column response CSV")->check(CLI::ExistingFile);
  frame_opt->excludes(resp_opt);
  infer->add_option("--config", inf_config, "JSON configuration (ROIs, mechanics)")->check(CLI::ExistingFile);

  ExportBarsOptions bars;
  std::string bar_locations, bar_levels;
  auto* export_bars = app.add_subcommand("export-bars", "Mean feature vectors per (location, level) for bar plots");
  export_bars->add_option("--dataset", bars.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  export_bars->add_option("--locations", bar_locations, "Comma-separated location indices")->required();
  export_bars->add_option("--levels", bar_levels, "Comma-separated depth levels")->required();
  export_bars->add_option("--out", bars.out, "Output CSV")->required();

  RenderOptions rend;
  std::string rend_config, rend_response;
  auto* render = app.add_subcommand("render", "Render the camera frame of one contact state");
  render->add_option("--config", rend_config, "JSON configuration")->check(CLI::ExistingFile);
  render->add_option("--location", rend.location, "Location index 0..24")->required();
  render->add_option("--level", rend.level, "Depth level 1..5")->required();
  render->add_option("--seed", rend.seed, "Noise seed")->default_val(0);
  render->add_option("--noise", rend.noise_sigma, "Noise sigma")->default_val(0.0);
  render->add_option("--out", rend.out, "Output PPM")->required();
  render->add_option("--response-out", rend_response, "Also write the response as CSV");

  try {
    app.parse(argc, argv);
    const auto opt_path = [](const std::string& s) {
      return s.empty() ? std::optional<std::filesystem::path>{} : std::filesystem::path(s);
    };

    if (*generate) {
      gen.config = opt_path(gen_config);
      return cmd_generate(gen, std::cout, std::cerr);
    }
    if (*train_eval) {
      te.config = opt_path(te_config);
      te.report_out = opt_path(te_out);
      te.model_out = opt_path(te_model);
      te.mode = mode_from_string(te_mode);
      if (!te_method.empty()) te.methods = {method_from_string(te_method)};
      return cmd_train_eval(te, std::cout, std::cerr);
    }
    if (*infer) {
      inf.frame = opt_path(inf_frame);
      inf.response = opt_path(inf_response);
      inf.config = opt_path(inf_config);
      return cmd_infer(inf, std::cout, std::cerr);
    }
    if (*export_bars) {
      bars.locations = parse_int_list(bar_locations);
      bars.levels = parse_int_list(bar_levels);
      return cmd_export_bars(bars, std::cout, std::cerr);
    }
    if (*render) {
      rend.config = opt_path(rend_config);
      rend.response_out = opt_path(rend_response);
      return cmd_render(rend, std::cout, std::cerr);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
