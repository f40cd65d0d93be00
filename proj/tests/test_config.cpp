#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "gdl/config.hpp"
#include "gdl/error.hpp"

using namespace gdl;
using cli::ConfigError;
namespace fs = std::filesystem;

namespace {

cli::ExperimentConfig parse(const std::string& body,
                            std::vector<std::string> overrides = {}) {
  return cli::parse_config("config_version = 1\n" + body, overrides);
}

void expect_error(const std::string& body, const std::string& needle,
                  std::vector<std::string> overrides = {}) {
  try {
    cli::parse_config("config_version = 1\n" + body, overrides);
    FAIL_CHECK("expected a config error mentioning \"" << needle << "\"");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("a version-only config yields the documented defaults") {
  const auto cfg = parse("");
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.data_dir.empty());
  CHECK(cfg.resolved_data_dir() == "out");
  CHECK(cfg.scene.kind == scene::SceneKind::kTerrain);
  CHECK(cfg.scene.width == 128);
  CHECK(cfg.scene.height == 96);
  CHECK(cfg.mask_lines == 24);
  CHECK(cfg.pulse_shape == rip::ProfileKind::kRectangular);
  CHECK(cfg.pulse_duration_ns == 200.0);
  CHECK(cfg.delays_ns == std::array<double, 3>{200.0, 400.0, 600.0});
  CHECK(cfg.grid_dr == 0.05);
  CHECK(cfg.peak_counts == 800.0);
  CHECK(cfg.noise.a == 1.0);
  CHECK(cfg.noise.b == 4.0);
  CHECK(cfg.estimator == "regressor");
  CHECK(cfg.epochs == 15);
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.learning_rate == 1e-4);
  CHECK(cfg.hidden == std::vector<int>{32, 32});
  CHECK(cfg.lambda_s == 10.0);
  CHECK(cfg.lambda_adv == 0.0);
  CHECK(cfg.scale_weights == std::vector<double>{1.0, 0.5, 0.25, 0.125});
  CHECK(cfg.aleatoric);
  CHECK(cfg.filter_kind == "uncertainty");
  CHECK(cfg.thresholds.empty());
  CHECK(cfg.coverages.empty());
  CHECK(cfg.eval_r_lo == 3.0);
  CHECK(cfg.eval_r_hi == 150.0);
  CHECK(cfg.render_kind == "depth");
  CHECK(cfg.render_output == "render.pgm");
}

TEST_CASE("section headers prefix keys with a dot") {
  const auto cfg = parse(
      "[scene]\n"
      "width = 64\n"
      "height = 48\n"
      "kind = \"ground_plane\"\n"
      "plane_distance = 42.5\n"
      "[train]\n"
      "epochs = 7\n");
  CHECK(cfg.scene.width == 64);
  CHECK(cfg.scene.height == 48);
  CHECK(cfg.scene.kind == scene::SceneKind::kGroundPlane);
  CHECK(cfg.scene.plane_distance == 42.5);
  CHECK(cfg.epochs == 7);

  const auto dotted = parse("scene.width = 64\n");
  CHECK(dotted.scene.width == 64);
}

TEST_CASE("comments, whitespace, and quoted strings parse cleanly") {
  const auto cfg = parse(
      "  output_dir   =  \"runs/base # 1\"   # trailing comment\n"
      "\n"
      "# full-line comment\n"
      "[noise]   # section comment\n"
      "  a = 2.5\n");
  CHECK(cfg.output_dir == "runs/base # 1");
  CHECK(cfg.noise.a == 2.5);
}

TEST_CASE("set overrides replace file values and accept lists") {
  const auto cfg = parse(
      "[scene]\nwidth = 64\n",
      {"scene.width=48", "train.hidden=[8, 8, 8]", "filter.thresholds=[0.5,1.5]",
       "output_dir=\"alt\""});
  CHECK(cfg.scene.width == 48);
  CHECK(cfg.hidden == std::vector<int>{8, 8, 8});
  CHECK(cfg.thresholds == std::vector<double>{0.5, 1.5});
  CHECK(cfg.output_dir == "alt");
}

TEST_CASE("unknown keys are rejected by name") {
  expect_error("speling_mistake = 1\n", "speling_mistake");
  expect_error("[scene]\nwdith = 64\n", "scene.wdith");
  expect_error("", "no.such.key", {"no.such.key=1"});
  // Multiple unknowns are all listed.
  try {
    parse("alpha = 1\nzeta = 2\n");
    FAIL_CHECK("expected a config error");
  } catch (const ConfigError& err) {
    const std::string what = err.what();
    CHECK(what.find("alpha") != std::string::npos);
    CHECK(what.find("zeta") != std::string::npos);
  }
}

TEST_CASE("config_version is mandatory and pinned") {
  CHECK_THROWS_AS(cli::parse_config("output_dir = \"x\"\n", {}), ConfigError);
  CHECK_THROWS_AS(cli::parse_config("config_version = 2\n", {}), ConfigError);
  CHECK_THROWS_AS(cli::parse_config("config_version = 0\n", {}), ConfigError);
  CHECK_NOTHROW(cli::parse_config("config_version = 1\n", {}));
  // An override can supply it too.
  CHECK_NOTHROW(cli::parse_config("", {"config_version=1"}));
}

TEST_CASE("duplicate keys are rejected, including the dotted spelling") {
  expect_error("output_dir = \"a\"\noutput_dir = \"b\"\n", "duplicate");
  expect_error("[scene]\nwidth = 32\n[scene]\nwidth = 48\n", "duplicate");
}

TEST_CASE("type mismatches name the offending key") {
  expect_error("scene.width = abc\n", "scene.width");
  expect_error("train.epochs = 2.5\n", "train.epochs");
  expect_error("loss.aleatoric = maybe\n", "loss.aleatoric");
  expect_error("train.hidden = 5\n", "must be a list");
  expect_error("scene.width = [16, 16]\n", "single value");
  expect_error("noise.seed = -1\n", "nonnegative");
  expect_error("noise.seed = 1.5\n", "nonnegative");
}

TEST_CASE("range validation") {
  expect_error("scene.width = 8\n", "scene.width");
  expect_error("train.val_fraction = 1.5\n", "val_fraction");
  expect_error("train.val_fraction = 0\n", "val_fraction");
  expect_error("rip.peak_counts = 2000\n", "rip.peak_counts");
  expect_error("train.epochs = 0\n", "train.epochs");
  expect_error("filter.coverages = [0.9, 0]\n", "coverages");
  expect_error("scene.r_near = 100\nscene.r_far = 50\n", "r_near");
  expect_error("rip.r_min_m = 150\nrip.r_max_m = 10\n", "r_min_m");
  expect_error("eval.r_lo_m = 100\neval.r_hi_m = 10\n", "r_lo_m");
  expect_error("train.hidden = [32, 0]\n", "hidden");
  expect_error("loss.scale_weights = [1, -0.5]\n", "scale_weights");
  expect_error("mask.dropout = 1.5\n", "mask.dropout");
}

TEST_CASE("delay lists need three strictly increasing entries") {
  expect_error("rip.delays_ns = [100, 200]\n", "3 entries");
  expect_error("rip.delays_ns = [200, 200, 300]\n", "increase");
  expect_error("rip.delays_ns = [-5, 200, 300]\n", "nonnegative");
  const auto cfg = parse("rip.delays_ns = [100, 250, 500]\n");
  CHECK(cfg.delays_ns == std::array<double, 3>{100.0, 250.0, 500.0});
}

TEST_CASE("enumerated choices reject anything off the list") {
  expect_error("estimator.kind = \"nearest\"\n", "estimator.kind");
  expect_error("estimator.timeslice_method = \"median\"\n", "timeslice_method");
  expect_error("filter.kind = \"variance\"\n", "filter.kind");
  expect_error("render.kind = \"albedo\"\n", "render.kind");
  expect_error("rip.attenuation = \"fog\"\n", "attenuation");
  expect_error("rip.pulse_shape = \"square\"\n", "pulse_shape");
  expect_error("scene.kind = \"city\"\n", "scene.kind");

  const auto cfg = parse(
      "estimator.kind = \"timeslice\"\n"
      "estimator.timeslice_method = \"rising_edge\"\n"
      "filter.kind = \"snr\"\n"
      "render.kind = \"uncertainty\"\n"
      "rip.attenuation = \"beer_lambert\"\n"
      "rip.kappa = 0.01\n"
      "rip.pulse_shape = \"triangular\"\n"
      "rip.gate_shape = \"gaussian\"\n");
  CHECK(cfg.estimator == "timeslice");
  CHECK(cfg.timeslice_method == "rising_edge");
  CHECK(cfg.filter_kind == "snr");
  CHECK(cfg.render_kind == "uncertainty");
  CHECK(cfg.attenuation == rip::AttenuationKind::kBeerLambert);
  CHECK(cfg.kappa == 0.01);
  CHECK(cfg.pulse_shape == rip::ProfileKind::kTriangular);
  CHECK(cfg.gate_shape == rip::ProfileKind::kGaussian);
}

TEST_CASE("malformed syntax is a config error") {
  expect_error("just a key\n", "key = value");
  expect_error("[scene\nwidth = 32\n", "section");
  expect_error("bad key = 1\n", "key");
  expect_error("x =\n", "empty value");
  expect_error("msg = \"unterminated\n", "unterminated");
  expect_error("list = [1, 2\n", "unterminated");
  expect_error("list = [1, , 2]\n", "empty list element");
  expect_error("", "--set expects", {"no_equals_sign"});
}

TEST_CASE("seeds accept the full 64-bit range") {
  const auto cfg = parse("noise.seed = 18446744073709551615\n");
  CHECK(cfg.noise.seed == 18446744073709551615ULL);
  expect_error("noise.seed = 99999999999999999999999\n", "out of range");
}

TEST_CASE("the adversarial weight parses but stays flagged for rejection at use") {
  const auto cfg = parse("loss.lambda_adv = 0.5\n");
  CHECK(cfg.lambda_adv == 0.5);
}

TEST_CASE("data directory falls back to the output directory") {
  const auto cfg = parse("output_dir = \"runs/a\"\ndata.dir = \"runs/b\"\n");
  CHECK(cfg.resolved_data_dir() == "runs/b");
  CHECK(parse("output_dir = \"runs/a\"\n").resolved_data_dir() == "runs/a");
}

TEST_CASE("configs load from disk with overrides applied") {
  const auto path = fs::temp_directory_path() /
                    ("gdl_cfg_" + std::to_string(::getpid()) + ".toml");
  {
    std::ofstream out(path);
    out << "config_version = 1\n[scene]\nwidth = 64\n";
  }
  const auto cfg = cli::load_config(path, {"scene.height=32"});
  CHECK(cfg.scene.width == 64);
  CHECK(cfg.scene.height == 32);
  fs::remove(path);
  CHECK_THROWS_AS(cli::load_config(path, {}), IoError);
}
