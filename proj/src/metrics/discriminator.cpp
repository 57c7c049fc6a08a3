#include "holo/metrics/discriminator.hpp"

#include <cmath>

#include "holo/nn/optim.hpp"

namespace holo::metrics {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Discriminator::Discriminator(const DiscriminatorConfig& cfg) : cfg_(cfg) {
  Rng rng(cfg.seed);
  conv0_ = nn::Conv1d("disc.conv0", {cfg.in_dim, cfg.hidden, 3, 1, 1, 1, true}, rng);
  conv1_ = nn::Conv1d("disc.conv1", {cfg.hidden, cfg.hidden, 3, 1, 1, 1, true}, rng);
  out_ = nn::Linear("disc.out", cfg.hidden, 1, rng);
}

double Discriminator::logit(const Mat& seq) const {
  require(seq.cols() == cfg_.in_dim && seq.rows() > 0, "discriminator: expected a non-empty T x " +
                                                           std::to_string(cfg_.in_dim) + " sequence");
  const SeqBatch h = nn::leaky_relu(conv1_.forward(nn::leaky_relu(conv0_.forward(SeqBatch::single(seq)))));
  const Mat pooled = h.data.colwise().mean();
  return out_.forward(SeqBatch::single(pooled)).data(0, 0);
}

double Discriminator::prob_real(const Mat& seq) const { return sigmoid(logit(seq)); }

double Discriminator::logit(const Mat& seq, Cache& cache) const {
  require(seq.cols() == cfg_.in_dim && seq.rows() > 0, "discriminator: bad input shape");
  cache.steps = static_cast<int>(seq.rows());
  const SeqBatch h0 = nn::leaky_relu(conv0_.forward(SeqBatch::single(seq), cache.conv0), cache.act0);
  const SeqBatch h1 = nn::leaky_relu(conv1_.forward(h0, cache.conv1), cache.act1);
  const Mat pooled = h1.data.colwise().mean();
  return out_.forward(SeqBatch::single(pooled), cache.out).data(0, 0);
}

void Discriminator::backward(double d_logit, const Cache& cache) {
  const SeqBatch dpool = out_.backward(SeqBatch::single(Mat::Constant(1, 1, d_logit)), cache.out);
  SeqBatch dh(dpool.data.replicate(cache.steps, 1) / cache.steps, 1, cache.steps);
  dh = conv1_.backward(nn::leaky_relu_backward(dh, cache.act1), cache.conv1);
  conv0_.backward(nn::leaky_relu_backward(dh, cache.act0), cache.conv0, false);
}

void Discriminator::zero_weights() {
  for (nn::Param* p : params()) p->value.setZero();
}

nn::ParamList Discriminator::params() {
  nn::ParamList out;
  conv0_.collect(out);
  conv1_.collect(out);
  out_.collect(out);
  return out;
}

DiscTrainResult train_discriminator(const std::vector<Mat>& real, const std::vector<Mat>& fake,
                                    const DiscTrainHyper& hyper, const DiscriminatorConfig& cfg) {
  require(!real.empty() && !fake.empty(), "train_discriminator: both real and fake sets must be non-empty");
  require(hyper.test_fraction > 0.0 && hyper.test_fraction < 1.0, "train_discriminator: test fraction must be in (0, 1)");
  DiscTrainResult res;
  const double ratio = static_cast<double>(std::max(real.size(), fake.size())) /
                       static_cast<double>(std::min(real.size(), fake.size()));
  if (ratio > 10.0) {
    res.warnings.push_back("discriminator class imbalance " + std::to_string(real.size()) + " real vs " +
                           std::to_string(fake.size()) + " fake exceeds 10:1");
  }
  Rng rng(derive_seed(hyper.seed, 0xd15c));
  auto split = [&](size_t n, std::vector<size_t>& train, std::vector<size_t>& test) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    size_t n_test = static_cast<size_t>(std::floor(hyper.test_fraction * static_cast<double>(n)));
    if (n >= 2) n_test = std::clamp<size_t>(n_test, 1, n - 1);
    test.assign(idx.begin(), idx.begin() + static_cast<long>(n_test));
    train.assign(idx.begin() + static_cast<long>(n_test), idx.end());
  };
  split(real.size(), res.train_real, res.test_real);
  split(fake.size(), res.train_fake, res.test_fake);

  // (is_real, index)
  std::vector<std::pair<bool, size_t>> items;
  for (size_t i : res.train_real) items.emplace_back(true, i);
  for (size_t i : res.train_fake) items.emplace_back(false, i);
  DiscriminatorConfig c = cfg;
  c.in_dim = static_cast<int>(real.front().cols());
  c.seed = cfg.seed;
  res.model = Discriminator(c);
  nn::ParamList params = res.model.params();
  nn::Adam opt(params, {hyper.lr, 0.9, 0.999, 1e-8});
  const size_t bs = static_cast<size_t>(std::max(1, hyper.batch_size));
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(items);
    for (size_t begin = 0; begin < items.size(); begin += bs) {
      const size_t end = std::min(items.size(), begin + bs);
      opt.zero_grad();
      for (size_t i = begin; i < end; ++i) {
        const auto [is_real, k] = items[i];
        Discriminator::Cache cache;
        const double z = res.model.logit(is_real ? real[k] : fake[k], cache);
        res.model.backward((sigmoid(z) - (is_real ? 1.0 : 0.0)) / static_cast<double>(end - begin), cache);
      }
      opt.step();
    }
  }
  double correct = 0.0, total = 0.0;
  for (size_t i : res.test_real) {
    correct += res.model.prob_real(real[i]) > 0.5 ? 1.0 : 0.0;
    total += 1.0;
  }
  for (size_t i : res.test_fake) {
    correct += res.model.prob_real(fake[i]) < 0.5 ? 1.0 : 0.0;
    total += 1.0;
  }
  res.heldout_accuracy = total > 0 ? correct / total : 0.0;
  return res;
}

double realism_score(const std::vector<Mat>& generated, const Discriminator& d) {
  require(!generated.empty(), "realism_score: empty set");
  double sum = 0.0;
  for (const Mat& g : generated) sum += d.prob_real(g);
  return sum / static_cast<double>(generated.size());
}

}  // namespace holo::metrics
