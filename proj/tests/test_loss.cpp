#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gdl/error.hpp"
#include "gdl/loss.hpp"
#include "gdl/rng.hpp"

using namespace gdl;

namespace {

Map2D<double> random_map(int w, int h, double lo, double hi, std::uint64_t seed) {
  Map2D<double> m(w, h);
  rng::Stream s(seed);
  for (double& v : m.values()) v = lo + (hi - lo) * s.uniform();
  return m;
}

Mask random_mask(int w, int h, double keep, std::uint64_t seed) {
  Mask m(w, h);
  rng::Stream s(seed);
  for (auto& v : m.values()) v = s.uniform() < keep ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("l1 loss equals the plain masked average of absolute errors") {
  Map2D<double> gt(2, 2);
  gt.at(0, 0) = 1; gt.at(1, 0) = 2; gt.at(0, 1) = 3; gt.at(1, 1) = 4;
  Map2D<double> pred = gt;
  const Mask full(2, 2, 1);
  CHECK(loss::l1_loss(gt, pred, full) == 0.0);

  pred.at(0, 0) = 1.5;
  pred.at(1, 0) = 1.5;
  Mask two(2, 2, 0);
  two.at(0, 0) = 1;
  two.at(1, 0) = 1;
  CHECK(loss::l1_loss(gt, pred, two) == doctest::Approx(0.5).epsilon(1e-15));

  // Loop oracle on a random field.
  const auto g = random_map(16, 12, 3.0, 150.0, 1);
  const auto p = random_map(16, 12, 3.0, 150.0, 2);
  const auto m = random_mask(16, 12, 0.7, 3);
  double acc = 0.0;
  int n = 0;
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x)
      if (m.at(x, y)) {
        acc += std::fabs(g.at(x, y) - p.at(x, y));
        ++n;
      }
  CHECK(loss::l1_loss(g, p, m) == doctest::Approx(acc / n).epsilon(1e-12));
}

TEST_CASE("l1 loss rejects empty masks and mismatched shapes") {
  const Map2D<double> gt(4, 4, 1.0);
  CHECK_THROWS_AS(loss::l1_loss(gt, gt, Mask(4, 4, 0)), EmptyMaskError);
  CHECK_THROWS_AS(loss::l1_loss(gt, Map2D<double>(3, 4, 1.0), Mask(4, 4, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(loss::l1_loss(gt, gt, Mask(5, 4, 1)), std::invalid_argument);
}

TEST_CASE("laplace negative log likelihood") {
  CHECK(loss::laplace_nll(10.0, 10.0, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(loss::laplace_nll(10.0, 12.0, 2.0) ==
        doctest::Approx(1.0 + 2.0 * std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(loss::laplace_nll(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(loss::laplace_nll(1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("laplace nll is minimized when sigma equals the absolute error") {
  const double err = 3.7;
  const double best = loss::laplace_nll(0.0, err, err);
  for (double sigma = 0.5; sigma < 12.0; sigma += 0.01) {
    if (std::fabs(sigma - err) < 0.02) continue;
    CHECK(loss::laplace_nll(0.0, err, sigma) > best);
  }
}

TEST_CASE("aleatoric term at one pixel follows |e|*exp(-s) + s") {
  Map2D<double> gt(1, 1, 10.0), pred(1, 1, 12.0), s(1, 1, std::log(2.0));
  const Mask m(1, 1, 1);
  CHECK(loss::aleatoric_l1(gt, pred, s, m) ==
        doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("aleatoric loss with zero log-variance reduces to l1") {
  const auto gt = random_map(8, 8, 3.0, 150.0, 4);
  const auto pred = random_map(8, 8, 3.0, 150.0, 5);
  const auto mask = random_mask(8, 8, 0.6, 6);
  const Map2D<double> zeros(8, 8, 0.0);
  CHECK(std::fabs(loss::aleatoric_l1(gt, pred, zeros, mask) -
                  loss::l1_loss(gt, pred, mask)) <= 1e-12);
}

TEST_CASE("aleatoric loss equals mean laplace nll minus log 2") {
  const auto gt = random_map(6, 6, 3.0, 150.0, 7);
  const auto pred = random_map(6, 6, 3.0, 150.0, 8);
  const auto s = random_map(6, 6, -1.0, 2.0, 9);
  const Mask full(6, 6, 1);
  double acc = 0.0;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x)
      acc += loss::laplace_nll(gt.at(x, y), pred.at(x, y), std::exp(s.at(x, y))) -
             std::log(2.0);
  CHECK(loss::aleatoric_l1(gt, pred, s, full) ==
        doctest::Approx(acc / 36.0).epsilon(1e-12));
}

TEST_CASE("per-pixel aleatoric terms respect the 1 + log|e| lower bound") {
  const auto gt = random_map(8, 8, 3.0, 150.0, 10);
  const auto pred = random_map(8, 8, 3.0, 150.0, 11);
  const Mask full(8, 8, 1);
  // Whatever the log-variance field, the loss cannot beat the per-pixel optimum.
  double bound = 0.0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      bound += 1.0 + std::log(std::fabs(gt.at(x, y) - pred.at(x, y)));
  bound /= 64.0;
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto s = random_map(8, 8, -3.0, 3.0, seed);
    CHECK(loss::aleatoric_l1(gt, pred, s, full) >= bound - 1e-12);
  }
}

TEST_CASE("downsampling averages valid pixels only") {
  Map2D<double> m(2, 2);
  m.at(0, 0) = 1; m.at(1, 0) = 2; m.at(0, 1) = 3; m.at(1, 1) = 4;
  const auto [full_out, full_mask] = loss::downsample_for_scale(m, Mask(2, 2, 1), 2);
  CHECK(full_out.width() == 1);
  CHECK(full_out.height() == 1);
  CHECK(full_out.at(0, 0) == 2.5);
  CHECK(full_mask.at(0, 0) == 1);

  Mask partial(2, 2, 0);
  partial.at(0, 0) = 1;
  partial.at(1, 1) = 1;
  const auto [part_out, part_mask] = loss::downsample_for_scale(m, partial, 2);
  CHECK(part_out.at(0, 0) == 2.5);  // (1 + 4) / 2
  CHECK(part_mask.at(0, 0) == 1);

  const auto [empty_out, empty_mask] = loss::downsample_for_scale(m, Mask(2, 2, 0), 2);
  CHECK(empty_mask.at(0, 0) == 0);
  CHECK(empty_out.at(0, 0) == 0.0);
}

TEST_CASE("downsampling with factor one preserves valid pixels exactly") {
  const auto m = random_map(6, 4, 0.0, 1.0, 12);
  const auto mask = random_mask(6, 4, 0.5, 13);
  const auto [out, out_mask] = loss::downsample_for_scale(m, mask, 1);
  CHECK(out_mask == mask);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      if (mask.at(x, y))
        CHECK(out.at(x, y) == m.at(x, y));
      else
        CHECK(out.at(x, y) == 0.0);  // invalid blocks are zero-filled
    }
}

TEST_CASE("downsampling validates the factor") {
  const Map2D<double> m(6, 4, 1.0);
  CHECK_THROWS_AS(loss::downsample_for_scale(m, Mask(6, 4, 1), 4),
                  std::invalid_argument);  // 6 % 4 != 0
  CHECK_THROWS_AS(loss::downsample_for_scale(m, Mask(6, 4, 1), 0),
                  std::invalid_argument);
}

TEST_CASE("pyramid keeps level zero intact and halves each level after") {
  const auto gt = random_map(8, 8, 3.0, 150.0, 14);
  const auto pred = random_map(8, 8, 3.0, 150.0, 15);
  const auto s = random_map(8, 8, -1.0, 1.0, 16);
  const auto mask = random_mask(8, 8, 0.5, 17);
  const auto levels = loss::make_pyramid(gt, pred, s, mask, 3);
  REQUIRE(levels.size() == 3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      if (mask.at(x, y)) CHECK(levels[0].gt.at(x, y) == gt.at(x, y));
  CHECK(levels[0].pred == pred);
  CHECK(levels[0].mask == mask);
  CHECK(levels[1].pred.width() == 4);
  CHECK(levels[2].pred.width() == 2);
  // Prediction pools over all pixels even where ground truth is missing.
  for (auto v : levels[2].mask.values())
    if (!v) continue;
  const auto [pred_pool, pred_mask] =
      loss::downsample_for_scale(pred, Mask(8, 8, 1), 4);
  CHECK(levels[2].pred == pred_pool);
  CHECK_THROWS_AS(loss::make_pyramid(gt, pred, s, mask, 0), std::invalid_argument);
}

TEST_CASE("multiscale loss is the weighted sum of level losses") {
  const auto gt = random_map(8, 8, 3.0, 150.0, 18);
  const auto pred = random_map(8, 8, 3.0, 150.0, 19);
  const auto s = random_map(8, 8, -1.0, 1.0, 20);
  const auto mask = random_mask(8, 8, 0.8, 21);
  const auto levels = loss::make_pyramid(gt, pred, s, mask, 3);

  const std::vector<double> weights = {1.0, 0.5, 0.25};
  double oracle = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i)
    oracle += weights[i] * loss::aleatoric_l1(levels[i].gt, levels[i].pred,
                                              levels[i].log_sigma, levels[i].mask);
  CHECK(loss::multiscale_aleatoric(levels, weights) ==
        doctest::Approx(oracle).epsilon(1e-12));

  const auto single = loss::make_pyramid(gt, pred, s, mask, 1);
  CHECK(loss::multiscale_aleatoric(single, {1.0}) ==
        doctest::Approx(loss::aleatoric_l1(gt, pred, s, mask)).epsilon(1e-15));

  CHECK(loss::multiscale_aleatoric(levels, {0.0, 0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(loss::multiscale_aleatoric(levels, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(loss::multiscale_aleatoric({}, {}), std::invalid_argument);
}

TEST_CASE("smoothness of a constant field is zero") {
  const Map2D<double> pred(8, 8, 42.0);
  const auto guide = random_map(8, 8, 0.0, 1.0, 22);
  CHECK(loss::smoothness_loss(pred, guide) == 0.0);
}

TEST_CASE("smoothness of a unit step under a flat guide") {
  Map2D<double> pred(2, 1);
  pred.at(0, 0) = 0.0;
  pred.at(1, 0) = 1.0;
  const Map2D<double> guide(2, 1, 0.5);
  CHECK(loss::smoothness_loss(pred, guide) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("guide edges attenuate the smoothness penalty") {
  Map2D<double> pred(2, 1);
  pred.at(0, 0) = 0.0;
  pred.at(1, 0) = 1.0;
  Map2D<double> guide(2, 1);
  guide.at(0, 0) = 0.0;
  guide.at(1, 0) = 3.0;
  CHECK(loss::smoothness_loss(pred, guide) ==
        doctest::Approx(std::exp(-3.0)).epsilon(1e-12));

  // A step in the prediction aligned with a guide edge costs less than one
  // crossing flat guide territory.
  const Map2D<double> flat_guide(2, 1, 1.0);
  CHECK(loss::smoothness_loss(pred, guide) < loss::smoothness_loss(pred, flat_guide));
}

TEST_CASE("smoothness averages both directions on a 2x2 field") {
  Map2D<double> pred(2, 2);
  pred.at(0, 0) = 0; pred.at(1, 0) = 1;
  pred.at(0, 1) = 0; pred.at(1, 1) = 1;
  const Map2D<double> guide(2, 2, 0.0);
  // Horizontal diffs are 1 in both rows (mean 1); vertical diffs are 0.
  CHECK(loss::smoothness_loss(pred, guide) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("total loss composes the pyramid term and weighted smoothness") {
  const auto gt = random_map(8, 8, 3.0, 150.0, 23);
  const auto pred = random_map(8, 8, 3.0, 150.0, 24);
  const auto s = random_map(8, 8, -1.0, 1.0, 25);
  const auto mask = random_mask(8, 8, 0.9, 26);
  const auto guide = random_map(8, 8, 0.0, 1.0, 27);

  loss::LossConfig config;
  config.scale_weights = {1.0, 0.5};
  const auto levels = loss::make_pyramid(gt, pred, s, mask, config.scales());

  config.lambda_s = 0.0;
  CHECK(loss::total_loss(levels, guide, config) ==
        doctest::Approx(loss::multiscale_aleatoric(levels, config.scale_weights))
            .epsilon(1e-15));

  config.lambda_s = 10.0;
  const double expected =
      loss::multiscale_aleatoric(levels, config.scale_weights) +
      10.0 * loss::smoothness_loss(pred, guide);
  CHECK(loss::total_loss(levels, guide, config) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("a nonzero adversarial weight is rejected as unsupported") {
  const auto gt = random_map(4, 4, 3.0, 150.0, 28);
  const auto levels = loss::make_pyramid(gt, gt, Map2D<double>(4, 4, 0.0),
                                         Mask(4, 4, 1), 1);
  loss::LossConfig config;
  config.scale_weights = {1.0};
  config.lambda_adv = 10.0;
  CHECK_THROWS_AS(loss::total_loss(levels, gt, config), UnsupportedFeatureError);
}
