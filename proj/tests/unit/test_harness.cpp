#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "colortac/config.hpp"
#include "colortac/errors.hpp"
#include "colortac/harness.hpp"

using namespace colortac;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// A small sweep: 6 trials, 2 samples per state.
fs::path small_config(const TempDir& dir, double sigma) {
  const auto p = dir / ("config_" + std::to_string(sigma) + ".json");
  write(p, R"({"optics": {"noise_sigma": )" + std::to_string(sigma) +
               R"(}, "sweep": {"n_trials": 6, "samples_per_state": 2}})");
  return p;
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const Config c = config_from_json(nlohmann::json::object());
  CHECK(c.optics.noise_sigma == OpticsParams{}.noise_sigma);
  CHECK(c.sweep.n_trials == 27);
  CHECK_NOTHROW(c.validate());
  CHECK(config_hash(c) == config_hash(config_from_json(config_to_json(c))));
  CHECK(c.mechanics().stiffness_n_per_mm == MechanicsParams::standard().stiffness_n_per_mm);

  const auto j = nlohmann::json::parse(R"({"geometry": {"emitter_edges": {"red": "bottom"}},
                                           "optics": {"noise_sigma": 0.05}, "roi": {"black_threshold": 20}})");
  const Config d = config_from_json(j);
  CHECK(d.geometry.emitter_edges[0] == Edge::bottom);
  CHECK(d.optics.noise_sigma == 0.05);
  CHECK(d.black_threshold == 20);
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"optics": {"nosie_sigma": 0.1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"lens": {}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"frame": {"disc_radius": 60}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"optics": {"beam_spot_mm": "wide"}})")), ConfigError);
  CHECK_THROWS(load_config("/nonexistent/colortac.json"));
}

TEST_CASE("explicit effective area overrides force calibration") {
  const Config c = config_from_json(nlohmann::json::parse(R"({"mechanics": {"effective_area_mm2": 10.0}})"));
  CHECK(force_from_depth(c.mechanics(), 3.0) == doctest::Approx(5.9e6 * 10e-6 * 3.0 / 5.0));
}

TEST_CASE("generate writes the dataset and reports counts") {
  TempDir dir("colortac_harness_generate");
  std::ostringstream out, err;
  GenerateOptions g;
  g.config = small_config(dir, 0.01);
  g.seed = 4;
  g.out = dir / "a.csv";
  CHECK(cmd_generate(g, out, err) == 0);
  CHECK(out.str().rfind("1500 samples, 12 per class\n", 0) == 0);
  g.out = dir / "b.csv";
  CHECK(cmd_generate(g, out, err) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(load_dataset(dir / "a.csv").size() == 1500);

  std::ostringstream err2;
  g.config = dir / "missing.json";
  CHECK(cmd_generate(g, out, err2) != 0);
  CHECK(err2.str().rfind("error: ", 0) == 0);
}

TEST_CASE("train-eval on noiseless data is perfect and reproducible") {
  TempDir dir("colortac_harness_train");
  std::ostringstream out, err;
  GenerateOptions g{small_config(dir, 0.0), 1, dir / "clean.csv"};
  REQUIRE(cmd_generate(g, out, err) == 0);

  TrainEvalOptions t;
  t.dataset = g.out;
  t.config = g.config;
  t.seed = 3;
  t.train_trials = 4;
  t.folds = 2;
  t.report_out = dir / "report.json";
  std::ostringstream text;
  REQUIRE(cmd_train_eval(t, text, err) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.at("rows").size() == 4);
  for (const auto& row : report.at("rows")) {
    CHECK(row.at("cv_accuracy") == 1.0);
    CHECK(row.at("generalization_accuracy") == 1.0);
  }
  CHECK(report.at("seed") == 3);
  CHECK(report.at("dataset_hash").get<std::string>().size() == 16);
  CHECK(report.at("config_hash").get<std::string>().size() == 16);
  CHECK(slurp(dir / "report.txt") == text.str());

  t.report_out = dir / "again.json";
  std::ostringstream text2;
  REQUIRE(cmd_train_eval(t, text2, err) == 0);
  CHECK(slurp(dir / "again.json") == slurp(dir / "report.json"));
  CHECK(text2.str() == text.str());
}

TEST_CASE("text and JSON reports carry identical numbers") {
  TempDir dir("colortac_harness_numbers");
  std::ostringstream out, err;
  GenerateOptions g{small_config(dir, 0.05), 2, dir / "noisy.csv"};
  REQUIRE(cmd_generate(g, out, err) == 0);
  for (auto mode : {Mode::flat, Mode::hierarchical}) {
    TrainEvalOptions t;
    t.dataset = g.out;
    t.methods = {Method::lda, Method::knn};
    t.mode = mode;
    t.train_trials = 4;
    t.folds = 2;
    t.report_out = dir / "r.json";
    std::ostringstream text;
    REQUIRE(cmd_train_eval(t, text, err) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
    std::vector<std::string> keys{"cv_accuracy", "generalization_accuracy"};
    if (mode == Mode::hierarchical) keys.insert(keys.end(), {"location_accuracy", "depth_accuracy", "combined_accuracy"});
    std::istringstream lines(text.str());
    std::string line;
    std::size_t row = 0;
    while (std::getline(lines, line)) {
      std::istringstream fields(line);
      std::string name;
      fields >> name;
      if (name != "lda" && name != "knn") continue;
      const auto& r = j.at("rows").at(row++);
      CHECK(r.at("method") == name);
      for (const auto& key : keys) {
        std::string value;
        fields >> value;
        CHECK(value == r.at(key).dump());
      }
    }
    CHECK(row == 2);
  }
}

TEST_CASE("train-eval error paths") {
  TempDir dir("colortac_harness_errors");
  std::ostringstream out;
  write(dir / "bad.csv", "trial,location,depth_level\n0,0,1\n");
  TrainEvalOptions t;
  t.dataset = dir / "bad.csv";
  std::ostringstream err;
  CHECK(cmd_train_eval(t, out, err) != 0);
  CHECK(err.str().find("parse error") != std::string::npos);

  GenerateOptions g{small_config(dir, 0.01), 1, dir / "d.csv"};
  REQUIRE(cmd_generate(g, out, err) == 0);
  t.dataset = g.out;
  t.model_out = dir / "m.json";
  std::ostringstream err2;
  CHECK(cmd_train_eval(t, out, err2) != 0);  // --model-out with four methods
  t.model_out.reset();
  t.train_trials = 6;
  std::ostringstream err3;
  CHECK(cmd_train_eval(t, out, err3) != 0);
}

TEST_CASE("infer from a rendered frame maps the level to force") {
  TempDir dir("colortac_harness_infer");
  std::ostringstream out, err;
  GenerateOptions g{small_config(dir, 0.0), 1, dir / "clean.csv"};
  REQUIRE(cmd_generate(g, out, err) == 0);
  for (auto mode : {Mode::flat, Mode::hierarchical}) {
    TrainEvalOptions t;
    t.dataset = g.out;
    t.methods = {Method::knn};
    t.mode = mode;
    t.train_trials = 4;
    t.folds = 2;
    t.model_out = dir / "model.json";
    REQUIRE(cmd_train_eval(t, out, err) == 0);

    RenderOptions r;
    r.location = 12;
    r.level = 5;
    r.out = dir / "frame.ppm";
    r.response_out = dir / "response.csv";
    REQUIRE(cmd_render(r, out, err) == 0);

    InferOptions inf;
    inf.model = dir / "model.json";
    inf.frame = r.out;
    std::ostringstream res;
    REQUIRE(cmd_infer(inf, res, err) == 0);
    CHECK(res.str() == "location=12 depth_level=5 force_N=18\n");

    inf.frame.reset();
    inf.response = r.response_out;
    std::ostringstream res2;
    REQUIRE(cmd_infer(inf, res2, err) == 0);
    CHECK(res2.str() == "location=12 depth_level=5 force_N=18\n");

    r.level = 1;
    r.location = 3;
    REQUIRE(cmd_render(r, out, err) == 0);
    std::ostringstream res3;
    REQUIRE(cmd_infer(inf, res3, err) == 0);
    CHECK(res3.str().find("depth_level=1 force_N=3.6") != std::string::npos);
  }

  save_ppm(Frame(640, 480), dir / "black.ppm");
  InferOptions inf;
  inf.model = dir / "model.json";
  inf.frame = dir / "black.ppm";
  std::ostringstream black_err;
  CHECK(cmd_infer(inf, out, black_err) != 0);
  CHECK(black_err.str().find("empty ROI") != std::string::npos);
}

TEST_CASE("infer_features rejects a wrong dimension") {
  Eigen::MatrixXd x(4, 3);
  x << 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 0;
  const std::vector<int> y{0, 0, 1, 1};
  const auto model = train(Method::knn, x, y).to_json();
  CHECK_THROWS_AS(infer_features(model, FeatureVector{}, MechanicsParams::standard()), DomainError);
}

TEST_CASE("export-bars") {
  TempDir dir("colortac_harness_bars");
  std::ostringstream out, err;
  GenerateOptions g{small_config(dir, 0.0), 1, dir / "clean.csv"};
  REQUIRE(cmd_generate(g, out, err) == 0);
  ExportBarsOptions b{g.out, {7}, {2, 4}, dir / "bars.csv"};
  REQUIRE(cmd_export_bars(b, out, err) == 0);
  std::istringstream in(slurp(b.out));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("location,depth_level,f00,", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    const int level = rows == 0 ? 2 : 4;
    const auto expect = features_from_response(
        deformed_response(SensorGeometry::standard(), OpticsParams{}, ContactState::make({}, 7, level)));
    std::istringstream fields(line);
    std::string cell;
    std::getline(fields, cell, ',');
    CHECK(cell == "7");
    std::getline(fields, cell, ',');
    CHECK(std::stoi(cell) == level);
    for (int f = 0; f < kFeatures; ++f) {
      std::getline(fields, cell, ',');
      CHECK(std::stof(cell) == static_cast<float>(expect[f]));
    }
    ++rows;
  }
  CHECK(rows == 2);

  b.locations = {30};
  std::ostringstream err2;
  CHECK(cmd_export_bars(b, out, err2) != 0);
}
