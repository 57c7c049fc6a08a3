#include <doctest.h>

#include <cmath>
#include <limits>

#include "holo/ar/generate.hpp"
#include "holo/error.hpp"
#include "holo/face/face_generator.hpp"
#include "holo/metrics/metrics.hpp"
#include "holo/motion/corpus.hpp"
#include "support/gradcheck.hpp"

using namespace holo;
using namespace holo::face;
using holo::testing::check_gradients;
using holo::testing::random_mat;

namespace {

FaceGeneratorConfig tiny(FeaturePath path) {
  FaceGeneratorConfig c;
  c.path = path;
  c.embed_dim = 8;
  c.hidden = 8;
  c.layers = 2;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("face MSE gradients match central differences") {
  for (FeaturePath path : {FeaturePath::kSpeech, FeaturePath::kMfcc}) {
    FaceGenerator g(tiny(path));
    Rng rng(5);
    const Mat x = random_mat(7, g.input_dim(), rng, 0.5);
    const Mat y = random_mat(7, motion::kFaceDim, rng, 0.3);
    auto mse = [&] { return (g.forward(x) - y).squaredNorm() / static_cast<double>(y.size()); };
    nn::ParamList ps = g.params();
    nn::zero_grads(ps);
    FaceGenerator::Cache cache;
    const Mat pred = g.forward(x, cache);
    g.backward((2.0 / static_cast<double>(y.size())) * (pred - y), cache);
    const auto r = check_gradients(ps, mse, 16);
    INFO(to_string(path), " worst ", r.worst_param, " ", r.worst_error);
    CHECK(r.worst_error < 1e-4);
  }
}

TEST_CASE("face output length equals input length") {
  FaceGenerator g(tiny(FeaturePath::kMfcc));
  Rng rng(1);
  for (int t = 1; t <= 12; ++t) CHECK(g.forward(random_mat(t, 64, rng)).rows() == t);
  FaceGeneratorConfig full;
  full.path = FeaturePath::kMfcc;
  const Mat out = FaceGenerator(full).forward(random_mat(30, 64, rng));
  CHECK(out.rows() == 30);
  CHECK(out.cols() == 103);
}

TEST_CASE("zero final layer gives zero faces") {
  FaceGeneratorConfig c = tiny(FeaturePath::kSpeech);
  c.zero_final_layer = true;
  Rng rng(2);
  CHECK(FaceGenerator(c).forward(random_mat(9, 768, rng)).isZero(0));
}

TEST_CASE("face inference is deterministic") {
  FaceGenerator g(tiny(FeaturePath::kSpeech));
  Rng rng(3);
  const Mat x = random_mat(11, 768, rng);
  CHECK((g.forward(x).array() == g.forward(x).array()).all());
  CHECK((FaceGenerator(tiny(FeaturePath::kSpeech)).forward(x).array() == g.forward(x).array()).all());
}

TEST_CASE("face receptive field is bounded by the kernel footprint") {
  FaceGenerator g(tiny(FeaturePath::kMfcc));
  Rng rng(4);
  Mat x = random_mat(30, 64, rng);
  const Mat a = g.forward(x);
  x.row(20) += random_mat(1, 64, rng);
  const Mat b = g.forward(x);
  // Layer norm mixes channels, not frames, so only the local window moves.
  const int r = g.receptive_radius();
  for (int t = 0; t < 30; ++t) {
    if (std::abs(t - 20) > r) REQUIRE((a.row(t).array() == b.row(t).array()).all());
  }
  CHECK(!(a.row(20).array() == b.row(20).array()).all());
}

TEST_CASE("face generator rejects mismatched features") {
  FaceGenerator g(tiny(FeaturePath::kSpeech));
  audio::AudioFeatureSeq a;
  a.kind = audio::FeatureKind::kMfcc64;
  a.frames = Mat::Zero(5, 64);
  CHECK_THROWS_AS(g.forward(a), ValidationError);
  CHECK_THROWS_AS(g.forward(Mat(Mat::Zero(5, 64))), ValidationError);
}

TEST_CASE("face training memorizes a single clip") {
  motion::CorpusConfig cc;
  cc.n_samples = 10;
  cc.max_seconds = 3.5;
  const motion::Corpus corpus = motion::synth_corpus(cc, 2);
  const motion::Sample& s = corpus.samples[0];
  FaceGeneratorConfig c;
  c.path = FeaturePath::kMfcc;
  c.hidden = 32;
  c.embed_dim = 64;
  FaceExample ex{s.id, ar::mfcc_features(s.waveform, s.motion.steps()), s.motion.face.cast<double>()};
  FaceTrainHyper h;
  h.lr = 0.01;
  h.epochs = 1000;
  const FaceTrainResult r = face_train(FaceGenerator(c), {ex}, {}, h);
  CHECK(r.log.back().train_mse <= 1e-3);
  CHECK(face_mse(r.model, {ex}) <= 1e-3);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  FaceGenerator g(tiny(FeaturePath::kMfcc));
  const std::vector<double> before = nn::flatten_values(g.params());
  Rng rng(6);
  FaceExample ex{"a", random_mat(12, 64, rng), random_mat(12, 103, rng)};
  FaceTrainHyper h;
  h.lr = 0.0;
  h.epochs = 3;
  FaceTrainResult r = face_train(g, {ex}, {ex}, h);
  CHECK(nn::flatten_values(r.model.params()) == before);
  CHECK(r.log.size() == 3);
}

TEST_CASE("face training keeps the best validation epoch") {
  Rng rng(7);
  FaceExample tr{"t", random_mat(20, 64, rng), random_mat(20, 103, rng, 0.1)};
  FaceExample va{"v", random_mat(20, 64, rng), random_mat(20, 103, rng, 0.1)};
  FaceTrainHyper h;
  h.lr = 0.02;
  h.epochs = 15;
  const FaceTrainResult r = face_train(FaceGenerator(tiny(FeaturePath::kMfcc)), {tr}, {va}, h);
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const auto& e : r.log) {
    if (e.val_mse < best) {
      best = e.val_mse;
      best_epoch = e.epoch;
    }
  }
  CHECK(r.best_epoch == best_epoch);
  CHECK(face_mse(r.model, {va}) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("non-finite loss aborts naming the clip") {
  Rng rng(8);
  Mat x = random_mat(6, 64, rng);
  x(2, 3) = std::numeric_limits<double>::quiet_NaN();
  FaceExample bad{"clip_with_nan", x, random_mat(6, 103, rng)};
  FaceTrainHyper h;
  h.epochs = 1;
  CHECK_THROWS_WITH_AS(face_train(FaceGenerator(tiny(FeaturePath::kMfcc)), {bad}, {}, h),
                       doctest::Contains("clip_with_nan"), NumericError);
  CHECK_THROWS_AS(face_train(FaceGenerator(tiny(FeaturePath::kMfcc)), {}, {}, h), ValidationError);
}

TEST_CASE("landmark proxy") {
  const LandmarkProxy& p = default_landmark_proxy();
  REQUIRE(p.map.rows() == kLandmarkCount);
  REQUIRE(p.map.cols() == motion::kFaceDim);
  SUBCASE("shipped map equals its generator") {
    const LandmarkProxy g = generate_landmark_proxy(kLandmarkProxySeed);
    CHECK((parse_landmark_proxy(format_landmark_proxy(g)).map.array() == p.map.array()).all());
  }
  SUBCASE("zero face maps to zero landmarks") { CHECK(landmark_proxy(Mat::Zero(4, 103)).isZero(0)); }
  SUBCASE("jaw rows are the identity") {
    Rng rng(9);
    const Mat f = random_mat(5, 103, rng);
    const Mat l = landmark_proxy(f);
    CHECK((l.leftCols(3).array() == f.leftCols(3).array()).all());
  }
  SUBCASE("equal streams score zero downstream") {
    Rng rng(10);
    const Mat f = random_mat(8, 103, rng);
    CHECK(metrics::l2_landmark(f, f) == 0.0);
    CHECK(metrics::lvd(f, f) == 0.0);
  }
  SUBCASE("shape errors") { CHECK_THROWS_AS(landmark_proxy(Mat::Zero(2, 100)), ValidationError); }
}
