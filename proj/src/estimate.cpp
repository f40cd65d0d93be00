#include "gdl/estimate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "gdl/error.hpp"
#include "gdl/parallel.hpp"
#include "gdl/rip.hpp"
#include "gdl/rng.hpp"

namespace gdl::estimate {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

double softplus(double x) {
  if (x > 30.0) return x;  // log1p(exp(x)) == x to double precision
  return std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double estimate_timeslice(std::span<const double> intensities,
                          std::span<const double> delays_s,
                          TimesliceMethod method, double rising_threshold) {
  const std::size_t n = intensities.size();
  if (n < 3 || delays_s.size() != n)
    throw std::invalid_argument(
        "estimate_timeslice: need matching lists of at least 3 delays");
  if (!all_finite(intensities) || !all_finite(delays_s))
    throw std::invalid_argument("estimate_timeslice: non-finite input");
  for (double z : intensities)
    if (z < 0.0)
      throw std::invalid_argument("estimate_timeslice: negative intensity");
  for (std::size_t k = 0; k < n; ++k) {
    if (delays_s[k] < 0.0)
      throw std::invalid_argument("estimate_timeslice: negative delay");
    if (k > 0 && delays_s[k] <= delays_s[k - 1])
      throw std::invalid_argument(
          "estimate_timeslice: delays must be strictly increasing");
  }
  if (method == TimesliceMethod::kRisingEdge &&
      !(rising_threshold > 0.0 && rising_threshold <= 1.0))
    throw std::invalid_argument(
        "estimate_timeslice: rising threshold must lie in (0, 1]");

  const double peak = *std::max_element(intensities.begin(), intensities.end());
  if (peak <= 0.0)
    throw NoSignalError("estimate_timeslice: all slice intensities are zero");

  auto range_of = [&](std::size_t k) {
    return rip::kSpeedOfLight * delays_s[k] / 2.0;
  };

  switch (method) {
    case TimesliceMethod::kRisingEdge: {
      const double level = rising_threshold * peak;
      for (std::size_t k = 0; k < n; ++k)
        if (intensities[k] >= level) return range_of(k);
      return range_of(n - 1);  // unreachable: the peak itself reaches level
    }
    case TimesliceMethod::kArgmax: {
      // Ascending scan resolves ties toward the smaller range.
      for (std::size_t k = 0; k < n; ++k)
        if (intensities[k] == peak) return range_of(k);
      return range_of(n - 1);  // unreachable
    }
    case TimesliceMethod::kWeightedAverage: {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        num += intensities[k] * range_of(k);
        den += intensities[k];
      }
      return num / den;
    }
  }
  throw std::invalid_argument("estimate_timeslice: unknown method");
}

double estimate_triangular_ratio(double z1, double z2, double r0, double r1) {
  if (!std::isfinite(z1) || !std::isfinite(z2) || z1 < 0.0 || z2 < 0.0)
    throw std::invalid_argument(
        "estimate_triangular_ratio: intensities must be finite and nonnegative");
  if (!std::isfinite(r0) || !std::isfinite(r1) || !(r0 < r1))
    throw std::invalid_argument(
        "estimate_triangular_ratio: need a proper range interval r0 < r1");
  const double total = z1 + z2;
  if (total <= 0.0)
    throw NoSignalError("estimate_triangular_ratio: both slices are zero");
  const double r = r0 + (r1 - r0) * (z2 / total);
  return std::clamp(r, r0, r1);
}

double ratio_feature(double z1, double z2, double z3) {
  if (!std::isfinite(z1) || !std::isfinite(z2) || !std::isfinite(z3) ||
      z1 < 0.0 || z2 < 0.0 || z3 < 0.0)
    throw std::invalid_argument(
        "ratio_feature: intensities must be finite and nonnegative");
  const double total = z1 + z2 + z3;
  if (total <= 0.0)
    throw NoSignalError("ratio_feature: all slices are zero");
  return (z2 + 2.0 * z3) / total;
}

double PolyRatioModel::evaluate(double q) const {
  double acc = 0.0;
  for (int k = 5; k >= 0; --k) acc = acc * q + coeffs[static_cast<std::size_t>(k)];
  return acc;
}

double PolyRatioModel::estimate(double z1, double z2, double z3) const {
  // Clamp to the fitted interval; the polynomial has no meaning outside it.
  const double q = std::clamp(ratio_feature(z1, z2, z3), q_lo, q_hi);
  return evaluate(q);
}

PolyRatioModel fit_ratio_polynomial(std::span<const std::array<double, 3>> z,
                                    std::span<const double> r) {
  constexpr std::size_t kTerms = 6;  // 5th-order polynomial
  const std::size_t n = z.size();
  if (n != r.size())
    throw std::invalid_argument("fit_ratio_polynomial: sample count mismatch");
  if (n < 50)
    throw std::invalid_argument(
        "fit_ratio_polynomial: need at least 50 samples");
  if (!all_finite(r))
    throw std::invalid_argument("fit_ratio_polynomial: non-finite range");

  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = z[i];
    if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || !std::isfinite(s[2]) ||
        s[0] < 0.0 || s[1] < 0.0 || s[2] < 0.0 || s[0] + s[1] + s[2] <= 0.0)
      throw std::invalid_argument(
          "fit_ratio_polynomial: every sample needs a positive slice sum");
    q[i] = ratio_feature(s[0], s[1], s[2]);
  }

  // Column-equilibrated Vandermonde normal equations. Scaling each power of
  // q by its largest magnitude keeps the 6x6 Gram system well conditioned.
  std::array<double, kTerms> scale{};
  std::vector<double> design(n * kTerms);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    for (std::size_t k = 0; k < kTerms; ++k) {
      design[i * kTerms + k] = p;
      scale[k] = std::max(scale[k], std::fabs(p));
      p *= q[i];
    }
  }
  for (std::size_t k = 0; k < kTerms; ++k) {
    if (scale[k] <= 0.0)
      throw FitFailureError(
          "fit_ratio_polynomial: degenerate ratio column (all samples equal?)");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < kTerms; ++k) design[i * kTerms + k] /= scale[k];

  std::array<double, kTerms * kTerms> gram{};
  std::array<double, kTerms> rhs{};
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &design[i * kTerms];
    for (std::size_t a = 0; a < kTerms; ++a) {
      rhs[a] += row[a] * r[i];
      for (std::size_t b = a; b < kTerms; ++b) gram[a * kTerms + b] += row[a] * row[b];
    }
  }
  for (std::size_t a = 0; a < kTerms; ++a)
    for (std::size_t b = 0; b < a; ++b) gram[a * kTerms + b] = gram[b * kTerms + a];

  // Cholesky factorization; a tiny pivot means the ratios do not span enough
  // distinct values for a 5th-order fit.
  double max_diag = 0.0;
  for (std::size_t a = 0; a < kTerms; ++a)
    max_diag = std::max(max_diag, gram[a * kTerms + a]);
  std::array<double, kTerms * kTerms> chol{};
  for (std::size_t a = 0; a < kTerms; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      double acc = gram[a * kTerms + b];
      for (std::size_t k = 0; k < b; ++k)
        acc -= chol[a * kTerms + k] * chol[b * kTerms + k];
      if (a == b) {
        if (!(acc > 1e-12 * max_diag))
          throw FitFailureError(
              "fit_ratio_polynomial: rank-deficient design matrix");
        chol[a * kTerms + a] = std::sqrt(acc);
      } else {
        chol[a * kTerms + b] = acc / chol[b * kTerms + b];
      }
    }
  }
  std::array<double, kTerms> y{};
  for (std::size_t a = 0; a < kTerms; ++a) {
    double acc = rhs[a];
    for (std::size_t k = 0; k < a; ++k) acc -= chol[a * kTerms + k] * y[k];
    y[a] = acc / chol[a * kTerms + a];
  }
  std::array<double, kTerms> w{};
  for (std::size_t ai = kTerms; ai-- > 0;) {
    double acc = y[ai];
    for (std::size_t k = ai + 1; k < kTerms; ++k)
      acc -= chol[k * kTerms + ai] * w[k];
    w[ai] = acc / chol[ai * kTerms + ai];
  }

  PolyRatioModel model;
  for (std::size_t k = 0; k < kTerms; ++k) model.coeffs[k] = w[k] / scale[k];
  const auto [qmin, qmax] = std::minmax_element(q.begin(), q.end());
  model.q_lo = *qmin;
  model.q_hi = *qmax;

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = model.evaluate(q[i]) - r[i];
    sq[i] = d * d;
  }
  model.residual_rmse = std::sqrt(pairwise_sum(sq) / static_cast<double>(n));
  if (!std::isfinite(model.residual_rmse))
    throw FitFailureError("fit_ratio_polynomial: non-finite residual");
  return model;
}

std::size_t PixelRegressor::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const auto out = static_cast<std::size_t>(widths[l]);
    const auto in = static_cast<std::size_t>(widths[l - 1]);
    n += out * in + out;
  }
  return n;
}

PixelRegressor init_regressor(std::span<const int> widths, std::uint64_t seed,
                              double range_lo, double range_hi) {
  if (widths.size() < 3)
    throw std::invalid_argument(
        "init_regressor: need at least one hidden layer");
  if (widths.front() != 3)
    throw std::invalid_argument(
        "init_regressor: input width must be 3 (one value per slice)");
  if (widths.back() != 2)
    throw std::invalid_argument(
        "init_regressor: output width must be 2 (depth and log-sigma)");
  for (int w : widths)
    if (w <= 0) throw std::invalid_argument("init_regressor: widths must be positive");
  if (!std::isfinite(range_lo) || !std::isfinite(range_hi) || !(range_lo < range_hi))
    throw std::invalid_argument("init_regressor: need range_lo < range_hi");

  PixelRegressor model;
  model.widths.assign(widths.begin(), widths.end());
  model.range_lo = range_lo;
  model.range_hi = range_hi;
  model.weights.resize(widths.size() - 1);
  model.biases.resize(widths.size() - 1);
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const auto out = static_cast<std::size_t>(widths[l]);
    const auto in = static_cast<std::size_t>(widths[l - 1]);
    rng::Stream stream(seed, 0x1417, l);
    auto& w = model.weights[l - 1];
    w.resize(out * in);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& x : w) x = stream.normal() * stddev;
    model.biases[l - 1].assign(out, 0.0);
  }
  return model;
}

namespace {

// Scratch buffers for one forward/backward pass; reused across samples.
struct Workspace {
  std::vector<std::vector<double>> pre;   // pre-activations u_l per layer
  std::vector<std::vector<double>> act;   // act[0] = scaled input
  std::vector<std::vector<double>> delta;

  explicit Workspace(const PixelRegressor& m) {
    const std::size_t layers = m.widths.size() - 1;
    pre.resize(layers);
    delta.resize(layers);
    act.resize(layers + 1);
    act[0].resize(static_cast<std::size_t>(m.widths[0]));
    for (std::size_t l = 0; l < layers; ++l) {
      const auto out = static_cast<std::size_t>(m.widths[l + 1]);
      pre[l].resize(out);
      delta[l].resize(out);
      act[l + 1].resize(out);
    }
  }
};

// Forward pass; hidden layers use softplus, the last layer is linear.
void forward_into(const PixelRegressor& m, const std::array<double, 3>& z,
                  Workspace& ws) {
  for (std::size_t j = 0; j < 3; ++j) ws.act[0][j] = z[j] * m.input_scale;
  const std::size_t layers = m.widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<std::size_t>(m.widths[l + 1]);
    const auto in = static_cast<std::size_t>(m.widths[l]);
    const auto& w = m.weights[l];
    const auto& prev = ws.act[l];
    for (std::size_t i = 0; i < out; ++i) {
      double acc = m.biases[l][i];
      const double* wrow = &w[i * in];
      for (std::size_t j = 0; j < in; ++j) acc += wrow[j] * prev[j];
      ws.pre[l][i] = acc;
      ws.act[l + 1][i] = (l + 1 < layers) ? softplus(acc) : acc;
    }
  }
}

Estimate heads_from(const PixelRegressor& m, const Workspace& ws) {
  const auto& out = ws.act.back();
  Estimate e;
  e.depth = m.range_lo + (m.range_hi - m.range_lo) * sigmoid(out[0]);
  e.log_sigma = out[1];
  return e;
}

void validate_model(const PixelRegressor& m) {
  if (m.widths.size() < 3 || m.widths.front() != 3 || m.widths.back() != 2)
    throw std::invalid_argument("regressor: malformed layer widths");
  if (m.weights.size() != m.widths.size() - 1 ||
      m.biases.size() != m.widths.size() - 1)
    throw std::invalid_argument("regressor: parameter/width mismatch");
  for (std::size_t l = 1; l < m.widths.size(); ++l) {
    const auto out = static_cast<std::size_t>(m.widths[l]);
    const auto in = static_cast<std::size_t>(m.widths[l - 1]);
    if (m.weights[l - 1].size() != out * in || m.biases[l - 1].size() != out)
      throw std::invalid_argument("regressor: parameter/width mismatch");
  }
  if (!(m.range_lo < m.range_hi) || !(m.input_scale > 0.0))
    throw std::invalid_argument("regressor: malformed range or input scale");
}

}  // namespace

Estimate regressor_forward(const PixelRegressor& model,
                           const std::array<double, 3>& z) {
  validate_model(model);
  if (!std::isfinite(z[0]) || !std::isfinite(z[1]) || !std::isfinite(z[2]))
    throw std::invalid_argument("regressor_forward: non-finite slice value");
  Workspace ws(model);
  forward_into(model, z, ws);
  return heads_from(model, ws);
}

namespace {

// Per-sample loss and parameter gradient accumulation. The gradient vector
// uses checkpoint order: for each layer, weights row-major then biases.
double sample_loss_and_accumulate(const PixelRegressor& m,
                                  const PixelSample& sample, bool aleatoric,
                                  Workspace& ws, std::span<double> grad) {
  forward_into(m, sample.z, ws);
  const std::size_t layers = m.widths.size() - 1;
  const auto& out = ws.act[layers];

  const double span = m.range_hi - m.range_lo;
  const double sig = sigmoid(out[0]);
  const double depth = m.range_lo + span * sig;
  const double s = out[1];
  const double err = sample.r - depth;

  double loss, d_depth, d_s;
  if (aleatoric) {
    const double w = std::exp(-s);
    loss = std::fabs(err) * w + s;
    d_depth = -sign(err) * w;
    d_s = 1.0 - std::fabs(err) * w;
  } else {
    loss = std::fabs(err);
    d_depth = -sign(err);
    d_s = 0.0;
  }

  auto& last = ws.delta[layers - 1];
  last[0] = d_depth * span * sig * (1.0 - sig);
  last[1] = d_s;

  for (std::size_t l = layers; l-- > 0;) {
    const auto outw = static_cast<std::size_t>(m.widths[l + 1]);
    const auto inw = static_cast<std::size_t>(m.widths[l]);
    std::size_t base = 0;
    for (std::size_t k = 0; k < l; ++k) {
      const auto o = static_cast<std::size_t>(m.widths[k + 1]);
      const auto i = static_cast<std::size_t>(m.widths[k]);
      base += o * i + o;
    }
    const auto& d = ws.delta[l];
    const auto& prev = ws.act[l];
    double* gw = grad.data() + base;
    double* gb = gw + outw * inw;
    for (std::size_t i = 0; i < outw; ++i) {
      const double di = d[i];
      double* grow = gw + i * inw;
      for (std::size_t j = 0; j < inw; ++j) grow[j] += di * prev[j];
      gb[i] += di;
    }
    if (l == 0) break;
    auto& dprev = ws.delta[l - 1];
    const auto& w = m.weights[l];
    for (std::size_t j = 0; j < inw; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < outw; ++i) acc += w[i * inw + j] * d[i];
      // softplus'(u) = sigmoid(u)
      dprev[j] = acc * sigmoid(ws.pre[l - 1][j]);
    }
  }
  return loss;
}

void flatten_params(const PixelRegressor& m, std::vector<double>& storage) {
  storage.clear();
  for (std::size_t l = 0; l + 1 < m.widths.size(); ++l) {
    storage.insert(storage.end(), m.weights[l].begin(), m.weights[l].end());
    storage.insert(storage.end(), m.biases[l].begin(), m.biases[l].end());
  }
}

void unflatten_params(std::span<const double> flat, PixelRegressor& m) {
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < m.widths.size(); ++l) {
    std::copy_n(flat.begin() + pos, m.weights[l].size(), m.weights[l].begin());
    pos += m.weights[l].size();
    std::copy_n(flat.begin() + pos, m.biases[l].size(), m.biases[l].begin());
    pos += m.biases[l].size();
  }
}

}  // namespace

double batch_loss_and_gradient(const PixelRegressor& model,
                               std::span<const PixelSample> batch,
                               bool aleatoric, std::span<double> gradient) {
  validate_model(model);
  if (batch.empty())
    throw std::invalid_argument("batch_loss_and_gradient: empty batch");
  if (gradient.size() != model.parameter_count())
    throw std::invalid_argument("batch_loss_and_gradient: gradient size mismatch");
  std::fill(gradient.begin(), gradient.end(), 0.0);

  Workspace ws(model);
  std::vector<double> losses(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    losses[i] = sample_loss_and_accumulate(model, batch[i], aleatoric, ws, gradient);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : gradient) g *= inv;
  return pairwise_sum(losses) * inv;
}

TrainResult train_regressor(const PixelRegressor& init,
                            std::span<const PixelSample> dataset,
                            const TrainConfig& config) {
  validate_model(init);
  if (dataset.size() < 1000)
    throw std::invalid_argument(
        "train_regressor: need at least 1000 samples");
  if (!(config.learning_rate > 0.0) || config.epochs < 1 ||
      config.batch_size < 1 ||
      !(config.val_fraction > 0.0 && config.val_fraction < 1.0))
    throw std::invalid_argument("train_regressor: malformed configuration");
  for (const auto& s : dataset)
    if (!std::isfinite(s.z[0]) || !std::isfinite(s.z[1]) ||
        !std::isfinite(s.z[2]) || !std::isfinite(s.r))
      throw std::invalid_argument("train_regressor: non-finite sample");

  const std::size_t n = dataset.size();
  auto n_val = static_cast<std::size_t>(
      std::llround(config.val_fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  const std::size_t n_train = n - n_val;

  // Deterministic split: one seeded shuffle, tail becomes validation.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  {
    rng::Stream stream(config.seed, 0xd5, 0);
    for (std::size_t i = n; i-- > 1;)
      std::swap(order[i], order[stream.below(i + 1)]);
  }
  std::vector<std::uint32_t> train_idx(order.begin(),
                                       order.begin() + static_cast<long>(n_train));
  std::vector<std::uint32_t> val_idx(order.begin() + static_cast<long>(n_train),
                                     order.end());
  std::sort(val_idx.begin(), val_idx.end());

  PixelRegressor model = init;
  const std::size_t n_params = model.parameter_count();
  std::vector<double> params;
  flatten_params(model, params);
  std::vector<double> grad(n_params), m1(n_params, 0.0), m2(n_params, 0.0);
  long long step = 0;

  std::vector<PixelSample> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));
  std::vector<double> val_abs(n_val);

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  double best_mae = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng::Stream shuffle(config.seed, 0x50f, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n_train; i-- > 1;)
      std::swap(train_idx[i], train_idx[shuffle.below(i + 1)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(n_train, start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(dataset[train_idx[i]]);

      unflatten_params(params, model);
      const double batch_loss =
          batch_loss_and_gradient(model, batch, config.aleatoric, grad);
      if (!std::isfinite(batch_loss))
        throw TrainingFailureError(
            "train_regressor: non-finite loss at epoch " + std::to_string(epoch),
            epoch);
      loss_sum += batch_loss * static_cast<double>(batch.size());

      ++step;
      const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < n_params; ++p) {
        m1[p] = config.adam_beta1 * m1[p] + (1.0 - config.adam_beta1) * grad[p];
        m2[p] = config.adam_beta2 * m2[p] + (1.0 - config.adam_beta2) * grad[p] * grad[p];
        params[p] -= config.learning_rate * (m1[p] / bc1) /
                     (std::sqrt(m2[p] / bc2) + config.adam_eps);
      }
    }

    unflatten_params(params, model);
    Workspace ws(model);
    for (std::size_t i = 0; i < n_val; ++i) {
      const auto& s = dataset[val_idx[i]];
      forward_into(model, s.z, ws);
      val_abs[i] = std::fabs(s.r - heads_from(model, ws).depth);
    }
    const double val_mae = pairwise_sum(val_abs) / static_cast<double>(n_val);
    if (!std::isfinite(val_mae))
      throw TrainingFailureError(
          "train_regressor: non-finite validation error at epoch " +
              std::to_string(epoch),
          epoch);
    result.history.push_back(
        {loss_sum / static_cast<double>(n_train), val_mae});
    if (val_mae < best_mae) {
      best_mae = val_mae;
      result.best = model;
      result.best_epoch = epoch;
    }
  }
  result.last = model;
  return result;
}

EstimateMaps infer_maps(const PixelRegressor& model,
                        const sensor::GatedStack& stack) {
  validate_model(model);
  for (const auto& slice : stack.slices)
    if (!slice.same_shape(stack.slices[0]) || slice.empty())
      throw std::invalid_argument("infer_maps: slices must share a nonempty shape");

  const int w = stack.width(), h = stack.height();
  EstimateMaps maps{Map2D<double>(w, h), Map2D<double>(w, h)};
  parallel_rows(h, [&](int y) {
    Workspace ws(model);
    for (int x = 0; x < w; ++x) {
      const std::array<double, 3> z = {
          static_cast<double>(stack.slices[0].at(x, y)),
          static_cast<double>(stack.slices[1].at(x, y)),
          static_cast<double>(stack.slices[2].at(x, y))};
      forward_into(model, z, ws);
      const Estimate e = heads_from(model, ws);
      maps.depth.at(x, y) = e.depth;
      maps.log_sigma.at(x, y) = e.log_sigma;
    }
  });
  return maps;
}

namespace {

constexpr char kCheckpointMagic[4] = {'G', 'D', 'L', 'R'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const PixelRegressor& model,
                     const std::filesystem::path& path) {
  validate_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("save_checkpoint: cannot open " + path.string());
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(model.widths.size()));
  for (int w : model.widths) put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(model.activation));
  put_f64(out, model.input_scale);
  put_f64(out, model.range_lo);
  put_f64(out, model.range_hi);
  for (std::size_t l = 0; l + 1 < model.widths.size(); ++l) {
    for (double v : model.weights[l]) put_f64(out, v);
    for (double v : model.biases[l]) put_f64(out, v);
  }
  if (!out)
    throw IoError("save_checkpoint: write failed for " + path.string());
}

PixelRegressor load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("load_checkpoint: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw IoError("load_checkpoint: not a regressor checkpoint: " + path.string());
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw IoError("load_checkpoint: unsupported version " +
                  std::to_string(version));
  const std::uint32_t n_widths = get_u32(in);
  if (!in || n_widths < 3 || n_widths > 64)
    throw IoError("load_checkpoint: corrupt layer table");
  PixelRegressor model;
  model.widths.resize(n_widths);
  for (auto& w : model.widths) {
    const std::uint32_t v = get_u32(in);
    if (v == 0 || v > (1u << 20)) throw IoError("load_checkpoint: corrupt width");
    w = static_cast<int>(v);
  }
  const std::uint32_t act = get_u32(in);
  if (act != 0) throw IoError("load_checkpoint: unknown activation code");
  model.activation = Activation::kSoftplus;
  model.input_scale = get_f64(in);
  model.range_lo = get_f64(in);
  model.range_hi = get_f64(in);
  model.weights.resize(n_widths - 1);
  model.biases.resize(n_widths - 1);
  for (std::size_t l = 1; l < n_widths; ++l) {
    const auto out = static_cast<std::size_t>(model.widths[l]);
    const auto inw = static_cast<std::size_t>(model.widths[l - 1]);
    auto& w = model.weights[l - 1];
    w.resize(out * inw);
    for (auto& v : w) v = get_f64(in);
    auto& b = model.biases[l - 1];
    b.resize(out);
    for (auto& v : b) v = get_f64(in);
  }
  if (!in) throw IoError("load_checkpoint: truncated file: " + path.string());
  in.peek();
  if (!in.eof())
    throw IoError("load_checkpoint: trailing bytes in " + path.string());
  validate_model(model);
  return model;
}

std::vector<PixelSample> collect_samples(const sensor::GatedStack& stack,
                                         const Map2D<double>& gt_depth,
                                         const Mask& mask) {
  for (const auto& slice : stack.slices)
    if (!slice.same_shape(stack.slices[0]))
      throw std::invalid_argument("collect_samples: slice shape mismatch");
  if (gt_depth.width() != stack.width() || gt_depth.height() != stack.height() ||
      mask.width() != stack.width() || mask.height() != stack.height())
    throw std::invalid_argument("collect_samples: shape mismatch");

  std::vector<PixelSample> samples;
  samples.reserve(static_cast<std::size_t>(valid_count(mask)));
  for (int y = 0; y < stack.height(); ++y)
    for (int x = 0; x < stack.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double r = gt_depth.at(x, y);
      if (!std::isfinite(r))
        throw std::invalid_argument(
            "collect_samples: non-finite depth under the mask");
      samples.push_back({{static_cast<double>(stack.slices[0].at(x, y)),
                          static_cast<double>(stack.slices[1].at(x, y)),
                          static_cast<double>(stack.slices[2].at(x, y))},
                         r});
    }
  return samples;
}

}  // namespace gdl::estimate
