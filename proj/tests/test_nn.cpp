#include <doctest.h>

#include "holo/audio/speech_encoder.hpp"
#include "holo/ar/crosscond.hpp"
#include "holo/nn/blocks.hpp"
#include "holo/nn/layers.hpp"
#include "holo/nn/optim.hpp"
#include "support/gradcheck.hpp"

using namespace holo;
using namespace holo::nn;
using holo::testing::check_gradients;
using holo::testing::check_input_gradient;
using holo::testing::random_mat;

namespace {

constexpr double kTol = 1e-4;

// Loss <y, R> for a fixed random R, so dL/dy = R.
struct Probe {
  Mat r;
  double operator()(const SeqBatch& y) const { return (y.data.array() * r.array()).sum(); }
};

}  // namespace

TEST_CASE("linear layer gradients") {
  Rng rng(1);
  Linear lin("lin", 5, 4, rng);
  SeqBatch x(random_mat(6, 5, rng), 2, 3);
  const Probe probe{random_mat(6, 4, rng)};
  ParamList ps;
  lin.collect(ps);
  zero_grads(ps);
  Linear::Cache cache;
  lin.forward(x, cache);
  const SeqBatch dx = lin.backward(SeqBatch(probe.r, 2, 3), cache);
  CHECK(check_gradients(ps, [&] { return probe(lin.forward(x)); }).worst_error < kTol);
  CHECK(check_input_gradient(x.data, dx.data, [&] { return probe(lin.forward(x)); }) < kTol);
}

TEST_CASE("conv1d gradients for padded and strided shapes") {
  Rng rng(2);
  for (const Conv1d::Options opt : {Conv1d::Options{3, 4, 3, 1, 1, 1, true}, Conv1d::Options{3, 2, 4, 2, 1, 1, true},
                                    Conv1d::Options{2, 3, 3, 1, 2, 0, false}}) {
    Conv1d conv("conv", opt, rng);
    SeqBatch x(random_mat(2 * 8, opt.in, rng), 2, 8);
    const int out_steps = conv.output_steps(8);
    const Probe probe{random_mat(2 * out_steps, opt.out, rng)};
    ParamList ps;
    conv.collect(ps);
    zero_grads(ps);
    Conv1d::Cache cache;
    conv.forward(x, cache);
    const SeqBatch dx = conv.backward(SeqBatch(probe.r, 2, out_steps), cache);
    CHECK(check_gradients(ps, [&] { return probe(conv.forward(x)); }).worst_error < kTol);
    CHECK(check_input_gradient(x.data, dx.data, [&] { return probe(conv.forward(x)); }) < kTol);
  }
}

TEST_CASE("masked conv weights stay zero and get no gradient") {
  Rng rng(3);
  Conv1d conv("conv", {2, 2, 3, 1, 2, 0, true}, rng);
  Mat mask = Mat::Ones(2, 6);
  mask.col(4).setZero();
  conv.set_mask(mask);
  CHECK(conv.weight.value.col(4).isZero(0));
  SeqBatch x(random_mat(5, 2, rng), 1, 5);
  Conv1d::Cache cache;
  conv.forward(x, cache);
  ParamList ps;
  conv.collect(ps);
  zero_grads(ps);
  conv.backward(SeqBatch(Mat::Ones(5, 2), 1, 5), cache);
  CHECK(conv.weight.grad.col(4).isZero(0));
  Adam opt(ps, {});
  opt.step();
  CHECK(conv.weight.value.col(4).isZero(0));
}

TEST_CASE("transposed conv gradients and length") {
  Rng rng(4);
  ConvTranspose1d up("up", {3, 2, 4, 2, 1}, rng);
  CHECK(up.output_steps(5) == 10);
  SeqBatch x(random_mat(10, 3, rng), 2, 5);
  const Probe probe{random_mat(20, 2, rng)};
  ParamList ps;
  up.collect(ps);
  zero_grads(ps);
  ConvTranspose1d::Cache cache;
  up.forward(x, cache);
  const SeqBatch dx = up.backward(SeqBatch(probe.r, 2, 10), cache);
  CHECK(check_gradients(ps, [&] { return probe(up.forward(x)); }).worst_error < kTol);
  CHECK(check_input_gradient(x.data, dx.data, [&] { return probe(up.forward(x)); }) < kTol);
}

TEST_CASE("transposed conv is the adjoint of the strided conv input map") {
  Rng rng(5);
  Conv1d conv("c", {2, 3, 4, 2, 1, 1, false}, rng);
  ConvTranspose1d up("u", {3, 2, 4, 2, 1}, rng);
  up.bias.value.setZero();
  // Match weights: conv weight is out x (k*in) = 3 x 8, transposed is in x (k*out) = 3 x 8.
  up.weight.value = conv.weight.value;
  SeqBatch x(random_mat(10, 2, rng), 1, 10);
  SeqBatch y(random_mat(5, 3, rng), 1, 5);
  const double lhs = (conv.forward(x).data.array() * y.data.array()).sum();
  const double rhs = (x.data.array() * up.forward(y).data.array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("layer norm gradients") {
  Rng rng(6);
  LayerNorm ln("ln", 5);
  ln.gain.value = random_mat(1, 5, rng);
  ln.bias.value = random_mat(1, 5, rng);
  SeqBatch x(random_mat(6, 5, rng), 2, 3);
  const Probe probe{random_mat(6, 5, rng)};
  ParamList ps;
  ln.collect(ps);
  zero_grads(ps);
  LayerNorm::Cache cache;
  ln.forward(x, cache);
  const SeqBatch dx = ln.backward(SeqBatch(probe.r, 2, 3), cache);
  CHECK(check_gradients(ps, [&] { return probe(ln.forward(x)); }).worst_error < kTol);
  CHECK(check_input_gradient(x.data, dx.data, [&] { return probe(ln.forward(x)); }) < kTol);
}

TEST_CASE("batch norm gradients with batch and frozen statistics") {
  Rng rng(7);
  for (bool frozen : {false, true}) {
    BatchNorm1d bn("bn", 4);
    bn.gain.value = random_mat(1, 4, rng);
    bn.running_mean.value = random_mat(1, 4, rng);
    bn.running_var.value = Mat::Constant(1, 4, 1.7);
    bn.frozen_stats = frozen;
    SeqBatch x(random_mat(8, 4, rng), 2, 4);
    const Probe probe{random_mat(8, 4, rng)};
    ParamList ps;
    bn.collect(ps);
    zero_grads(ps);
    BatchNorm1d::Cache cache;
    bn.forward(x, cache);
    const SeqBatch dx = bn.backward(SeqBatch(probe.r, 2, 4), cache);
    auto loss = [&] {
      BatchNorm1d::Cache c;
      return probe(bn.forward(x, c));
    };
    const Mat mean_before = bn.running_mean.value;
    CHECK(check_gradients(ps, loss).worst_error < kTol);
    CHECK(check_input_gradient(x.data, dx.data, loss) < kTol);
    if (frozen) CHECK((bn.running_mean.value.array() == mean_before.array()).all());
  }
}

TEST_CASE("frozen batch norm matches inference") {
  Rng rng(8);
  BatchNorm1d bn("bn", 3);
  bn.running_mean.value = random_mat(1, 3, rng);
  bn.running_var.value = Mat::Constant(1, 3, 0.5);
  bn.frozen_stats = true;
  SeqBatch x(random_mat(6, 3, rng), 1, 6);
  BatchNorm1d::Cache cache;
  CHECK((bn.forward(x, cache).data.array() == bn.forward(x).data.array()).all());
}

TEST_CASE("leaky relu gradient") {
  Rng rng(9);
  SeqBatch x(random_mat(7, 3, rng), 1, 7);
  const Probe probe{random_mat(7, 3, rng)};
  ActCache cache;
  leaky_relu(x, cache);
  const SeqBatch dx = leaky_relu_backward(SeqBatch(probe.r, 1, 7), cache);
  CHECK(check_input_gradient(x.data, dx.data, [&] { return probe(leaky_relu(x)); }) < kTol);
}

TEST_CASE("temporal encoder and decoder gradients") {
  Rng rng(10);
  const TemporalCodecConfig cfg{5, 6, 4};
  TemporalEncoder enc("enc", cfg, rng);
  TemporalDecoder dec("dec", cfg, rng);
  // Enough latent rows that batch statistics are well conditioned.
  SeqBatch x(random_mat(3 * 16, 5, rng), 3, 16);
  SeqBatch z(random_mat(3 * 4, 4, rng), 3, 4);
  const Probe pe{random_mat(12, 4, rng)};
  const Probe pd{random_mat(48, 5, rng)};
  ParamList pe_list, pd_list;
  enc.collect(pe_list);
  dec.collect(pd_list);
  zero_grads(pe_list);
  zero_grads(pd_list);
  TemporalEncoder::Cache ec;
  CHECK(enc.forward(x, ec).steps == 4);
  const SeqBatch dx = enc.backward(SeqBatch(pe.r, 3, 4), ec, true);
  TemporalDecoder::Cache dc;
  CHECK(dec.forward(z, dc).steps == 16);
  dec.backward(SeqBatch(pd.r, 3, 16), dc);
  auto enc_loss = [&] {
    TemporalEncoder::Cache c;
    return pe(enc.forward(x, c));
  };
  auto dec_loss = [&] {
    TemporalDecoder::Cache c;
    return pd(dec.forward(z, c));
  };
  const auto ge = check_gradients(pe_list, enc_loss);
  const auto gd = check_gradients(pd_list, dec_loss);
  INFO("encoder worst ", ge.worst_param, " decoder worst ", gd.worst_param);
  CHECK(ge.worst_error < kTol);
  CHECK(gd.worst_error < kTol);
  CHECK(check_input_gradient(x.data, dx.data, enc_loss) < kTol);
}

TEST_CASE("speech backbone gradients") {
  audio::SpeechEncoderConfig cfg;
  cfg.channels = {2, 3, 3, 4};
  cfg.strides = {2, 2, 2, 2};
  cfg.backbone_dim = 5;
  cfg.embed_dim = 3;
  audio::FallbackSpeechEncoder enc(cfg);
  Rng rng(11);
  SeqBatch samples(random_mat(64, 1, rng), 1, 64);
  audio::FallbackSpeechEncoder::Cache cache;
  const SeqBatch y = enc.backbone_forward(samples, cache);
  const Probe probe{random_mat(y.data.rows(), y.data.cols(), rng)};
  ParamList ps;
  enc.collect_backbone(ps);
  zero_grads(ps);
  enc.backbone_backward(SeqBatch(probe.r, 1, y.steps), cache);
  auto loss = [&] {
    audio::FallbackSpeechEncoder::Cache c;
    return probe(enc.backbone_forward(samples, c));
  };
  CHECK(check_gradients(ps, loss).worst_error < kTol);
}

TEST_CASE("gated trunk gradients") {
  Rng rng(12);
  using ar::Visibility;
  ar::GatedTrunk trunk("trunk", {Visibility::kPast, Visibility::kPastAndCurrent, Visibility::kHidden}, 4, 3, 2, rng);
  ParamList ps;
  trunk.collect(ps);
  for (Param* p : ps) {
    if (p->name.find("speaker") != std::string::npos) p->value = random_mat(2, 8, rng, 0.3);
  }
  SeqBatch x(random_mat(2 * 5, 3, rng), 2, 5);
  const std::vector<int> speakers{1, 0};
  const Probe probe{random_mat(10, 4, rng)};
  zero_grads(ps);
  ar::GatedTrunk::Cache cache;
  trunk.forward(x, speakers, cache);
  const SeqBatch dx = trunk.backward(SeqBatch(probe.r, 2, 5), cache);
  auto loss = [&] { return probe(trunk.forward(x, speakers)); };
  CHECK(check_gradients(ps, loss).worst_error < kTol);
  CHECK(check_input_gradient(x.data, dx.data, loss) < kTol);
}

TEST_CASE("sgd with momentum follows the textbook recurrence") {
  Param p("w", Mat::Constant(1, 1, 1.0));
  SgdMomentum opt({&p}, 0.1, 0.9);
  p.grad(0, 0) = 2.0;
  opt.step();
  CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.1 * 2.0));
  opt.step();
  CHECK(p.value(0, 0) == doctest::Approx(0.8 - 0.1 * (0.9 * 2.0 + 2.0)));
}

TEST_CASE("adam first step moves by lr against the gradient sign") {
  Param p("w", Mat::Constant(1, 2, 0.0));
  Adam opt({&p}, {0.01, 0.9, 0.999, 1e-8});
  p.grad(0, 0) = 3.0;
  p.grad(0, 1) = -0.5;
  opt.step();
  CHECK(p.value(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p.value(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("flatten and assign round-trip parameter values") {
  Rng rng(13);
  Linear a("a", 3, 2, rng), b("b", 3, 2, rng);
  ParamList pa, pb;
  a.collect(pa);
  b.collect(pb);
  assign_values(pb, flatten_values(pa));
  CHECK((a.weight.value.array() == b.weight.value.array()).all());
  CHECK(parameter_count(pa) == 8);
}
