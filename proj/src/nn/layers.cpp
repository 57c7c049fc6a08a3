#include "holo/nn/layers.hpp"

#include <cmath>

namespace holo::nn {

namespace {

Mat uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

void check_channels(const SeqBatch& x, int expected, const char* layer) {
  if (x.channels() != expected) {
    throw ValidationError(std::string(layer) + ": expected " + std::to_string(expected) + " input channels, got " +
                          std::to_string(x.channels()));
  }
}

}  // namespace

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, int in, int out, Rng& rng, bool with_bias) : has_bias(with_bias) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = Param(name + ".weight", uniform_init(out, in, bound, rng));
  bias = Param(name + ".bias", with_bias ? uniform_init(1, out, bound, rng) : Mat::Zero(1, out));
}

SeqBatch Linear::forward(const SeqBatch& x) const {
  check_channels(x, in_features(), "Linear");
  Mat y = x.data * weight.value.transpose();
  if (has_bias) y.rowwise() += bias.value.row(0);
  return SeqBatch(std::move(y), x.batch, x.steps);
}

SeqBatch Linear::forward(const SeqBatch& x, Cache& cache) const {
  cache.input = x.data;
  return forward(x);
}

SeqBatch Linear::backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad) {
  weight.grad.noalias() += dy.data.transpose() * cache.input;
  if (has_bias) bias.grad.row(0) += dy.data.colwise().sum();
  if (!need_input_grad) return {};
  Mat dx = dy.data * weight.value;
  return SeqBatch(std::move(dx), dy.batch, dy.steps);
}

void Linear::collect(ParamList& out) {
  out.push_back(&weight);
  if (has_bias) out.push_back(&bias);
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(const std::string& name, const Options& opt, Rng& rng) : opt_(opt) {
  require(opt.in > 0 && opt.out > 0 && opt.kernel > 0 && opt.stride > 0, "Conv1d: invalid options");
  const double bound = 1.0 / std::sqrt(static_cast<double>(opt.in * opt.kernel));
  weight = Param(name + ".weight", uniform_init(opt.out, static_cast<Eigen::Index>(opt.kernel) * opt.in, bound, rng));
  bias = Param(name + ".bias", opt.bias ? uniform_init(1, opt.out, bound, rng) : Mat::Zero(1, opt.out));
}

int Conv1d::output_steps(int in_steps) const {
  const int span = in_steps + opt_.pad_left + opt_.pad_right - opt_.kernel;
  return span < 0 ? 0 : span / opt_.stride + 1;
}

Mat Conv1d::im2col(const SeqBatch& x, int out_steps) const {
  const int in = opt_.in;
  Mat cols = Mat::Zero(static_cast<Eigen::Index>(x.batch) * out_steps, static_cast<Eigen::Index>(opt_.kernel) * in);
  for (int b = 0; b < x.batch; ++b) {
    for (int t = 0; t < out_steps; ++t) {
      const Eigen::Index r = static_cast<Eigen::Index>(b) * out_steps + t;
      for (int j = 0; j < opt_.kernel; ++j) {
        const int src = t * opt_.stride + j - opt_.pad_left;
        if (src < 0 || src >= x.steps) continue;
        cols.row(r).segment(static_cast<Eigen::Index>(j) * in, in) = x.data.row(x.row(b, src));
      }
    }
  }
  return cols;
}

SeqBatch Conv1d::forward(const SeqBatch& x) const {
  Cache scratch;
  return forward(x, scratch);
}

SeqBatch Conv1d::forward(const SeqBatch& x, Cache& cache) const {
  check_channels(x, opt_.in, "Conv1d");
  const int out_steps = output_steps(x.steps);
  require(out_steps > 0, "Conv1d: input of " + std::to_string(x.steps) + " steps is shorter than the kernel footprint");
  cache.cols = im2col(x, out_steps);
  cache.batch = x.batch;
  cache.in_steps = x.steps;
  Mat y = cache.cols * weight.value.transpose();
  if (opt_.bias) y.rowwise() += bias.value.row(0);
  return SeqBatch(std::move(y), x.batch, out_steps);
}

SeqBatch Conv1d::backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad) {
  if (weight.mask.size() > 0) {
    weight.grad.noalias() += (dy.data.transpose() * cache.cols).cwiseProduct(weight.mask);
  } else {
    weight.grad.noalias() += dy.data.transpose() * cache.cols;
  }
  if (opt_.bias) bias.grad.row(0) += dy.data.colwise().sum();
  if (!need_input_grad) return {};

  const Mat dcols = dy.data * weight.value;
  SeqBatch dx(cache.batch, cache.in_steps, opt_.in);
  const int in = opt_.in;
  for (int b = 0; b < cache.batch; ++b) {
    for (int t = 0; t < dy.steps; ++t) {
      const Eigen::Index r = static_cast<Eigen::Index>(b) * dy.steps + t;
      for (int j = 0; j < opt_.kernel; ++j) {
        const int src = t * opt_.stride + j - opt_.pad_left;
        if (src < 0 || src >= cache.in_steps) continue;
        dx.data.row(dx.row(b, src)) += dcols.row(r).segment(static_cast<Eigen::Index>(j) * in, in);
      }
    }
  }
  return dx;
}

void Conv1d::set_mask(const Mat& mask) {
  require(mask.rows() == weight.value.rows() && mask.cols() == weight.value.cols(), "Conv1d::set_mask: shape mismatch");
  weight.mask = mask;
  weight.value = weight.value.cwiseProduct(mask);
}

void Conv1d::collect(ParamList& out) {
  out.push_back(&weight);
  if (opt_.bias) out.push_back(&bias);
}

// ------------------------------------------------------- ConvTranspose1d

ConvTranspose1d::ConvTranspose1d(const std::string& name, const Options& opt, Rng& rng) : opt_(opt) {
  require(opt.in > 0 && opt.out > 0 && opt.kernel > 0 && opt.stride > 0, "ConvTranspose1d: invalid options");
  const double bound = 1.0 / std::sqrt(static_cast<double>(opt.out * opt.kernel));
  weight = Param(name + ".weight", uniform_init(opt.in, static_cast<Eigen::Index>(opt.kernel) * opt.out, bound, rng));
  bias = Param(name + ".bias", uniform_init(1, opt.out, bound, rng));
}

int ConvTranspose1d::output_steps(int in_steps) const {
  return (in_steps - 1) * opt_.stride - 2 * opt_.pad + opt_.kernel;
}

SeqBatch ConvTranspose1d::forward(const SeqBatch& x) const {
  Cache scratch;
  return forward(x, scratch);
}

SeqBatch ConvTranspose1d::forward(const SeqBatch& x, Cache& cache) const {
  check_channels(x, opt_.in, "ConvTranspose1d");
  const int out_steps = output_steps(x.steps);
  require(out_steps > 0, "ConvTranspose1d: empty output");
  cache.input = x.data;
  cache.batch = x.batch;
  cache.in_steps = x.steps;
  const Mat ycols = x.data * weight.value;
  const int out = opt_.out;
  SeqBatch y(x.batch, out_steps, out);
  for (int b = 0; b < x.batch; ++b) {
    for (int t = 0; t < x.steps; ++t) {
      const Eigen::Index r = x.row(b, t);
      for (int j = 0; j < opt_.kernel; ++j) {
        const int dst = t * opt_.stride + j - opt_.pad;
        if (dst < 0 || dst >= out_steps) continue;
        y.data.row(y.row(b, dst)) += ycols.row(r).segment(static_cast<Eigen::Index>(j) * out, out);
      }
    }
  }
  y.data.rowwise() += bias.value.row(0);
  return y;
}

SeqBatch ConvTranspose1d::backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad) {
  const int out = opt_.out;
  Mat dycols = Mat::Zero(static_cast<Eigen::Index>(cache.batch) * cache.in_steps,
                         static_cast<Eigen::Index>(opt_.kernel) * out);
  for (int b = 0; b < cache.batch; ++b) {
    for (int t = 0; t < cache.in_steps; ++t) {
      const Eigen::Index r = static_cast<Eigen::Index>(b) * cache.in_steps + t;
      for (int j = 0; j < opt_.kernel; ++j) {
        const int dst = t * opt_.stride + j - opt_.pad;
        if (dst < 0 || dst >= dy.steps) continue;
        dycols.row(r).segment(static_cast<Eigen::Index>(j) * out, out) = dy.data.row(dy.row(b, dst));
      }
    }
  }
  weight.grad.noalias() += cache.input.transpose() * dycols;
  bias.grad.row(0) += dy.data.colwise().sum();
  if (!need_input_grad) return {};
  Mat dx = dycols * weight.value.transpose();
  return SeqBatch(std::move(dx), cache.batch, cache.in_steps);
}

void ConvTranspose1d::collect(ParamList& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

// ------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(const std::string& name, int channels, double eps) : eps_(eps) {
  gain = Param(name + ".gain", Mat::Ones(1, channels));
  bias = Param(name + ".bias", Mat::Zero(1, channels));
}

SeqBatch LayerNorm::forward(const SeqBatch& x) const {
  Cache scratch;
  return forward(x, scratch);
}

SeqBatch LayerNorm::forward(const SeqBatch& x, Cache& cache) const {
  check_channels(x, static_cast<int>(gain.value.cols()), "LayerNorm");
  const double c = static_cast<double>(x.channels());
  const Vec mean = x.data.rowwise().sum() / c;
  Mat centered = x.data.colwise() - mean;
  const Vec var = centered.rowwise().squaredNorm() / c;
  cache.inv_std = (var.array() + eps_).rsqrt().matrix();
  cache.normalized = centered.array().colwise() * cache.inv_std.array();
  Mat y = cache.normalized.array().rowwise() * gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  return SeqBatch(std::move(y), x.batch, x.steps);
}

SeqBatch LayerNorm::backward(const SeqBatch& dy, const Cache& cache) {
  gain.grad.row(0) += dy.data.cwiseProduct(cache.normalized).colwise().sum();
  bias.grad.row(0) += dy.data.colwise().sum();
  const Mat dn = dy.data.array().rowwise() * gain.value.row(0).array();
  const double c = static_cast<double>(dy.channels());
  const Vec mean_dn = dn.rowwise().sum() / c;
  const Vec mean_dn_n = dn.cwiseProduct(cache.normalized).rowwise().sum() / c;
  Mat dx = dn.colwise() - mean_dn;
  dx -= (cache.normalized.array().colwise() * mean_dn_n.array()).matrix();
  dx = dx.array().colwise() * cache.inv_std.array();
  return SeqBatch(std::move(dx), dy.batch, dy.steps);
}

void LayerNorm::collect(ParamList& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

// ----------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(const std::string& name, int channels, double momentum, double eps)
    : momentum_(momentum), eps_(eps) {
  gain = Param(name + ".gain", Mat::Ones(1, channels));
  bias = Param(name + ".bias", Mat::Zero(1, channels));
  running_mean = Param(name + ".running_mean", Mat::Zero(1, channels));
  running_var = Param(name + ".running_var", Mat::Ones(1, channels));
}

SeqBatch BatchNorm1d::forward(const SeqBatch& x) const {
  check_channels(x, static_cast<int>(gain.value.cols()), "BatchNorm1d");
  // Same arithmetic as the frozen training path, so both agree bit for bit.
  const RowVec inv_std = (running_var.value.row(0).array() + eps_).rsqrt().matrix();
  Mat y = ((x.data.rowwise() - running_mean.value.row(0)).array().rowwise() * inv_std.array()).rowwise() *
          gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  return SeqBatch(std::move(y), x.batch, x.steps);
}

SeqBatch BatchNorm1d::forward(const SeqBatch& x, Cache& cache) {
  check_channels(x, static_cast<int>(gain.value.cols()), "BatchNorm1d");
  cache.frozen = frozen_stats;
  if (frozen_stats) {
    cache.inv_std = (running_var.value.row(0).array() + eps_).rsqrt().matrix();
    cache.normalized = (x.data.rowwise() - running_mean.value.row(0)).array().rowwise() * cache.inv_std.array();
    Mat y = cache.normalized.array().rowwise() * gain.value.row(0).array();
    y.rowwise() += bias.value.row(0);
    return SeqBatch(std::move(y), x.batch, x.steps);
  }
  const double n = static_cast<double>(x.data.rows());
  const RowVec mean = x.data.colwise().sum() / n;
  Mat centered = x.data.rowwise() - mean;
  const RowVec var = centered.colwise().squaredNorm() / n;
  cache.inv_std = (var.array() + eps_).rsqrt().matrix();
  cache.normalized = centered.array().rowwise() * cache.inv_std.array();
  const double unbias = n > 1 ? n / (n - 1) : 1.0;
  running_mean.value.row(0) = (1 - momentum_) * running_mean.value.row(0) + momentum_ * mean;
  running_var.value.row(0) = (1 - momentum_) * running_var.value.row(0) + momentum_ * unbias * var;
  Mat y = cache.normalized.array().rowwise() * gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  return SeqBatch(std::move(y), x.batch, x.steps);
}

SeqBatch BatchNorm1d::backward(const SeqBatch& dy, const Cache& cache) {
  gain.grad.row(0) += dy.data.cwiseProduct(cache.normalized).colwise().sum();
  bias.grad.row(0) += dy.data.colwise().sum();
  const Mat dn = dy.data.array().rowwise() * gain.value.row(0).array();
  if (cache.frozen) {
    Mat dx = dn.array().rowwise() * cache.inv_std.array();
    return SeqBatch(std::move(dx), dy.batch, dy.steps);
  }
  const double n = static_cast<double>(dy.data.rows());
  const RowVec mean_dn = dn.colwise().sum() / n;
  const RowVec mean_dn_n = dn.cwiseProduct(cache.normalized).colwise().sum() / n;
  Mat dx = dn.rowwise() - mean_dn;
  dx -= (cache.normalized.array().rowwise() * mean_dn_n.array()).matrix();
  dx = dx.array().rowwise() * cache.inv_std.array();
  return SeqBatch(std::move(dx), dy.batch, dy.steps);
}

void BatchNorm1d::collect(ParamList& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

void BatchNorm1d::collect_buffers(ParamList& out) {
  out.push_back(&running_mean);
  out.push_back(&running_var);
}

// ----------------------------------------------------------- activations

SeqBatch leaky_relu(const SeqBatch& x, double slope) {
  Mat y = x.data.unaryExpr([slope](double v) { return v > 0 ? v : slope * v; });
  return SeqBatch(std::move(y), x.batch, x.steps);
}

SeqBatch leaky_relu(const SeqBatch& x, ActCache& cache, double slope) {
  cache.input = x.data;
  return leaky_relu(x, slope);
}

SeqBatch leaky_relu_backward(const SeqBatch& dy, const ActCache& cache, double slope) {
  Mat dx = dy.data.binaryExpr(cache.input, [slope](double g, double v) { return v > 0 ? g : slope * g; });
  return SeqBatch(std::move(dx), dy.batch, dy.steps);
}

}  // namespace holo::nn
