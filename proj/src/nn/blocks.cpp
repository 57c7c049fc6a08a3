#include "holo/nn/blocks.hpp"

namespace holo::nn {

namespace {

Conv1d::Options same_conv(int in, int out) {
  return Conv1d::Options{.in = in, .out = out, .kernel = 3, .stride = 1, .pad_left = 1, .pad_right = 1};
}

Conv1d::Options down_conv(int channels) {
  return Conv1d::Options{.in = channels, .out = channels, .kernel = 4, .stride = 2, .pad_left = 1, .pad_right = 1};
}

}  // namespace

// --------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(const std::string& name, int channels, Rng& rng) {
  for (int i = 0; i < 3; ++i) {
    const std::string n = name + ".unit" + std::to_string(i);
    convs_[i] = Conv1d(n + ".conv", same_conv(channels, channels), rng);
    norms_[i] = BatchNorm1d(n + ".bn", channels);
  }
}

SeqBatch ResidualBlock::forward(const SeqBatch& x) const {
  SeqBatch h = x;
  for (int i = 0; i < 3; ++i) h = leaky_relu(norms_[i].forward(convs_[i].forward(h)));
  h.data += x.data;
  return h;
}

SeqBatch ResidualBlock::forward(const SeqBatch& x, Cache& cache) {
  SeqBatch h = x;
  for (int i = 0; i < 3; ++i) {
    Unit& u = cache.units[i];
    h = leaky_relu(norms_[i].forward(convs_[i].forward(h, u.conv), u.norm), u.act);
  }
  h.data += x.data;
  return h;
}

SeqBatch ResidualBlock::backward(const SeqBatch& dy, const Cache& cache) {
  SeqBatch g = dy;
  for (int i = 2; i >= 0; --i) {
    const Unit& u = cache.units[i];
    g = convs_[i].backward(norms_[i].backward(leaky_relu_backward(g, u.act), u.norm), u.conv);
  }
  g.data += dy.data;
  return g;
}

void ResidualBlock::collect(ParamList& out) {
  for (int i = 0; i < 3; ++i) {
    convs_[i].collect(out);
    norms_[i].collect(out);
  }
}

void ResidualBlock::set_frozen_stats(bool frozen) {
  for (auto& n : norms_) n.frozen_stats = frozen;
}

void ResidualBlock::collect_buffers(ParamList& out) {
  for (auto& n : norms_) n.collect_buffers(out);
}

// ------------------------------------------------------- TemporalEncoder

TemporalEncoder::TemporalEncoder(const std::string& name, const TemporalCodecConfig& cfg, Rng& rng) : cfg_(cfg) {
  stem_ = Conv1d(name + ".stem", same_conv(cfg.io_dim, cfg.hidden), rng);
  for (int i = 0; i < 3; ++i) res_[i] = ResidualBlock(name + ".res" + std::to_string(i), cfg.hidden, rng);
  for (int i = 0; i < 2; ++i) down_[i] = Conv1d(name + ".down" + std::to_string(i), down_conv(cfg.hidden), rng);
  proj_ = Linear(name + ".proj", cfg.hidden, cfg.latent_dim, rng);
}

SeqBatch TemporalEncoder::forward(const SeqBatch& x) const {
  require(x.steps % kDownsample == 0,
          "encoder input length " + std::to_string(x.steps) + " is not divisible by 4; truncate to a multiple of 4");
  SeqBatch h = leaky_relu(stem_.forward(x));
  for (int i = 0; i < 3; ++i) {
    h = res_[i].forward(h);
    if (i < 2) h = leaky_relu(down_[i].forward(h));
  }
  return proj_.forward(h);
}

SeqBatch TemporalEncoder::forward(const SeqBatch& x, Cache& cache) {
  require(x.steps % kDownsample == 0,
          "encoder input length " + std::to_string(x.steps) + " is not divisible by 4; truncate to a multiple of 4");
  SeqBatch h = leaky_relu(stem_.forward(x, cache.stem), cache.stem_act);
  for (int i = 0; i < 3; ++i) {
    h = res_[i].forward(h, cache.res[i]);
    if (i < 2) h = leaky_relu(down_[i].forward(h, cache.down[i]), cache.down_act[i]);
  }
  return proj_.forward(h, cache.proj);
}

SeqBatch TemporalEncoder::backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad) {
  SeqBatch g = proj_.backward(dy, cache.proj);
  for (int i = 2; i >= 0; --i) {
    if (i < 2) g = down_[i].backward(leaky_relu_backward(g, cache.down_act[i]), cache.down[i]);
    g = res_[i].backward(g, cache.res[i]);
  }
  return stem_.backward(leaky_relu_backward(g, cache.stem_act), cache.stem, need_input_grad);
}

void TemporalEncoder::collect(ParamList& out) {
  stem_.collect(out);
  for (int i = 0; i < 3; ++i) {
    res_[i].collect(out);
    if (i < 2) down_[i].collect(out);
  }
  proj_.collect(out);
}

void TemporalEncoder::set_frozen_stats(bool frozen) {
  for (auto& r : res_) r.set_frozen_stats(frozen);
}

void TemporalEncoder::collect_buffers(ParamList& out) {
  for (auto& r : res_) r.collect_buffers(out);
}

// ------------------------------------------------------- TemporalDecoder

TemporalDecoder::TemporalDecoder(const std::string& name, const TemporalCodecConfig& cfg, Rng& rng) : cfg_(cfg) {
  proj_ = Linear(name + ".proj", cfg.latent_dim, cfg.hidden, rng);
  for (int i = 0; i < 3; ++i) res_[i] = ResidualBlock(name + ".res" + std::to_string(i), cfg.hidden, rng);
  for (int i = 0; i < 2; ++i) {
    up_[i] = ConvTranspose1d(name + ".up" + std::to_string(i),
                             ConvTranspose1d::Options{.in = cfg.hidden, .out = cfg.hidden, .kernel = 4, .stride = 2, .pad = 1},
                             rng);
  }
  out_ = Conv1d(name + ".out", same_conv(cfg.hidden, cfg.io_dim), rng);
}

SeqBatch TemporalDecoder::forward(const SeqBatch& z) const {
  SeqBatch h = leaky_relu(proj_.forward(z));
  for (int i = 0; i < 3; ++i) {
    h = res_[i].forward(h);
    if (i < 2) h = leaky_relu(up_[i].forward(h));
  }
  return out_.forward(h);
}

SeqBatch TemporalDecoder::forward(const SeqBatch& z, Cache& cache) {
  SeqBatch h = leaky_relu(proj_.forward(z, cache.proj), cache.proj_act);
  for (int i = 0; i < 3; ++i) {
    h = res_[i].forward(h, cache.res[i]);
    if (i < 2) h = leaky_relu(up_[i].forward(h, cache.up[i]), cache.up_act[i]);
  }
  return out_.forward(h, cache.out);
}

SeqBatch TemporalDecoder::backward(const SeqBatch& dy, const Cache& cache) {
  SeqBatch g = out_.backward(dy, cache.out);
  for (int i = 2; i >= 0; --i) {
    if (i < 2) g = up_[i].backward(leaky_relu_backward(g, cache.up_act[i]), cache.up[i]);
    g = res_[i].backward(g, cache.res[i]);
  }
  return proj_.backward(leaky_relu_backward(g, cache.proj_act), cache.proj);
}

void TemporalDecoder::collect(ParamList& out) {
  proj_.collect(out);
  for (int i = 0; i < 3; ++i) {
    res_[i].collect(out);
    if (i < 2) up_[i].collect(out);
  }
  out_.collect(out);
}

void TemporalDecoder::collect_buffers(ParamList& out) {
  for (auto& r : res_) r.collect_buffers(out);
}

void TemporalDecoder::zero_output_layer() {
  out_.weight.value.setZero();
  out_.bias.value.setZero();
}

}  // namespace holo::nn
