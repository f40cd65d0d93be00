#include "gdl/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "gdl/error.hpp"

namespace gdl::loss {
namespace {

void require_same_shape(const Map2D<double>& a, const Map2D<double>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("loss: map dimensions differ");
}

void require_mask_shape(const Map2D<double>& a, const Mask& m) {
  if (a.width() != m.width() || a.height() != m.height())
    throw std::invalid_argument("loss: mask dimensions differ");
}

}  // namespace

double l1_loss(const Map2D<double>& gt, const Map2D<double>& pred, const Mask& mask) {
  require_same_shape(gt, pred);
  require_mask_shape(gt, mask);
  std::vector<double> terms;
  terms.reserve(gt.size());
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x)
      if (mask.at(x, y)) terms.push_back(std::fabs(gt.at(x, y) - pred.at(x, y)));
  if (terms.empty()) throw EmptyMaskError("l1_loss: no valid pixels");
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double laplace_nll(double r, double r_hat, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("laplace_nll: sigma must be positive");
  return std::fabs(r - r_hat) / sigma + std::log(sigma) + std::log(2.0);
}

double aleatoric_l1(const Map2D<double>& gt, const Map2D<double>& pred,
                    const Map2D<double>& log_sigma, const Mask& mask) {
  require_same_shape(gt, pred);
  require_same_shape(gt, log_sigma);
  require_mask_shape(gt, mask);
  std::vector<double> terms;
  terms.reserve(gt.size());
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x)
      if (mask.at(x, y)) {
        const double s = log_sigma.at(x, y);
        terms.push_back(std::fabs(gt.at(x, y) - pred.at(x, y)) * std::exp(-s) + s);
      }
  if (terms.empty()) throw EmptyMaskError("aleatoric_l1: no valid pixels");
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

std::pair<Map2D<double>, Mask> downsample_for_scale(const Map2D<double>& map,
                                                    const Mask& mask, int factor) {
  require_mask_shape(map, mask);
  if (factor < 1) throw std::invalid_argument("downsample_for_scale: factor must be >= 1");
  if (map.width() % factor != 0 || map.height() % factor != 0)
    throw std::invalid_argument("downsample_for_scale: factor must divide dimensions");

  const int w = map.width() / factor, h = map.height() / factor;
  Map2D<double> out(w, h, 0.0);
  Mask out_mask(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx)
          if (mask.at(x * factor + dx, y * factor + dy)) {
            sum += map.at(x * factor + dx, y * factor + dy);
            ++n;
          }
      if (n > 0) {
        out.at(x, y) = sum / n;
        out_mask.at(x, y) = 1;
      }
    }
  return {std::move(out), std::move(out_mask)};
}

double multiscale_aleatoric(const std::vector<ScaleLevel>& levels,
                            const std::vector<double>& scale_weights) {
  if (levels.size() != scale_weights.size())
    throw std::invalid_argument("multiscale_aleatoric: level/weight count mismatch");
  if (levels.empty())
    throw std::invalid_argument("multiscale_aleatoric: need at least one level");
  double total = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (scale_weights[i] == 0.0) continue;  // keeps all-zero-weight configs usable
    total += scale_weights[i] *
             aleatoric_l1(levels[i].gt, levels[i].pred, levels[i].log_sigma, levels[i].mask);
  }
  return total;
}

std::vector<ScaleLevel> make_pyramid(const Map2D<double>& gt,
                                     const Map2D<double>& pred,
                                     const Map2D<double>& log_sigma,
                                     const Mask& mask, int scales) {
  if (scales < 1) throw std::invalid_argument("make_pyramid: need at least one scale");
  const Mask full(gt.width(), gt.height(), 1);
  std::vector<ScaleLevel> levels;
  for (int i = 0; i < scales; ++i) {
    const int factor = 1 << i;
    auto [g, gm] = downsample_for_scale(gt, mask, factor);
    auto [p, pm] = downsample_for_scale(pred, full, factor);
    auto [s, sm] = downsample_for_scale(log_sigma, full, factor);
    levels.push_back({std::move(g), std::move(p), std::move(s), std::move(gm)});
  }
  return levels;
}

double smoothness_loss(const Map2D<double>& pred, const Map2D<double>& guide) {
  require_same_shape(pred, guide);
  const int w = pred.width(), h = pred.height();
  double loss = 0.0;
  if (w > 1) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(h) * (w - 1));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + 1 < w; ++x) {
        const double dp = pred.at(x + 1, y) - pred.at(x, y);
        const double dg = guide.at(x + 1, y) - guide.at(x, y);
        terms.push_back(std::fabs(dp) * std::exp(-std::fabs(dg)));
      }
    loss += pairwise_sum(terms) / static_cast<double>(terms.size());
  }
  if (h > 1) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(w) * (h - 1));
    for (int y = 0; y + 1 < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dp = pred.at(x, y + 1) - pred.at(x, y);
        const double dg = guide.at(x, y + 1) - guide.at(x, y);
        terms.push_back(std::fabs(dp) * std::exp(-std::fabs(dg)));
      }
    loss += pairwise_sum(terms) / static_cast<double>(terms.size());
  }
  return loss;
}

double total_loss(const std::vector<ScaleLevel>& levels, const Map2D<double>& guide,
                  const LossConfig& config) {
  if (config.lambda_adv != 0.0)
    throw UnsupportedFeatureError(
        "total_loss: adversarial term (lambda_adv != 0) is not supported");
  double total = multiscale_aleatoric(levels, config.scale_weights);
  if (config.lambda_s != 0.0)
    total += config.lambda_s * smoothness_loss(levels.front().pred, guide);
  return total;
}

}  // namespace gdl::loss
