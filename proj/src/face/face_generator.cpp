#include "holo/face/face_generator.hpp"

#include <cmath>
#include <limits>

#include "holo/error.hpp"
#include "holo/motion/motion.hpp"
#include "holo/nn/optim.hpp"

namespace holo::face {

std::string to_string(FeaturePath p) { return p == FeaturePath::kSpeech ? "speech" : "mfcc"; }

FeaturePath feature_path_from_string(const std::string& s) {
  if (s == "speech" || s == "speech256") return FeaturePath::kSpeech;
  if (s == "mfcc" || s == "mfcc64") return FeaturePath::kMfcc;
  throw ValidationError("unknown face feature path '" + s + "' (expected speech or mfcc)");
}

audio::FeatureKind input_kind(FeaturePath p) {
  return p == FeaturePath::kSpeech ? audio::FeatureKind::kSpeech768 : audio::FeatureKind::kMfcc64;
}

FaceGenerator::FaceGenerator(const FaceGeneratorConfig& cfg) : cfg_(cfg) {
  require(cfg.layers >= 1 && cfg.hidden >= 1 && cfg.embed_dim >= 1, "invalid face generator config");
  Rng rng(cfg.seed);
  if (cfg.path == FeaturePath::kSpeech) {
    proj_ = nn::Linear("face.proj", audio::feature_dim(audio::FeatureKind::kSpeech768), cfg.embed_dim, rng);
  } else {
    mfcc_conv_ = nn::Conv1d(
        "face.mfcc_encoder",
        nn::Conv1d::Options{.in = 64, .out = cfg.embed_dim, .kernel = 3, .stride = 1, .pad_left = 1, .pad_right = 1},
        rng);
  }
  int in = cfg.embed_dim;
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string n = "face.tcn" + std::to_string(i);
    convs_.emplace_back(
        n + ".conv",
        nn::Conv1d::Options{.in = in, .out = cfg.hidden, .kernel = 3, .stride = 1, .pad_left = 1, .pad_right = 1},
        rng);
    norms_.emplace_back(n + ".ln", cfg.hidden);
    in = cfg.hidden;
  }
  out_ = nn::Linear("face.out", cfg.hidden, motion::kFaceDim, rng);
  if (cfg.zero_final_layer) {
    out_.weight.value.setZero();
    out_.bias.value.setZero();
  }
}

int FaceGenerator::input_dim() const { return audio::feature_dim(input_kind(cfg_.path)); }

int FaceGenerator::receptive_radius() const { return cfg_.layers + (cfg_.path == FeaturePath::kMfcc ? 1 : 0); }

Mat FaceGenerator::forward(const audio::AudioFeatureSeq& a) const {
  if (a.kind != input_kind(cfg_.path)) {
    throw ValidationError("face generator (" + to_string(cfg_.path) + " path) expects " +
                          audio::to_string(input_kind(cfg_.path)) + " features, got " + audio::to_string(a.kind));
  }
  return forward(a.frames);
}

Mat FaceGenerator::forward(const Mat& features) const {
  require(features.cols() == input_dim(), "face generator expects " + std::to_string(input_dim()) +
                                              "-dim features, got " + std::to_string(features.cols()));
  require(features.rows() >= 1, "face generator needs at least one frame");
  SeqBatch h = SeqBatch::single(features);
  if (cfg_.path == FeaturePath::kSpeech) {
    h = proj_.forward(h);
  } else {
    h = nn::leaky_relu(mfcc_conv_.forward(h));
  }
  for (size_t i = 0; i < convs_.size(); ++i) h = nn::leaky_relu(norms_[i].forward(convs_[i].forward(h)));
  return out_.forward(h).data;
}

Mat FaceGenerator::forward(const Mat& features, Cache& cache) {
  require(features.cols() == input_dim(), "face generator expects " + std::to_string(input_dim()) +
                                              "-dim features, got " + std::to_string(features.cols()));
  SeqBatch h = SeqBatch::single(features);
  if (cfg_.path == FeaturePath::kSpeech) {
    h = proj_.forward(h, cache.proj);
  } else {
    h = nn::leaky_relu(mfcc_conv_.forward(h, cache.mfcc_conv), cache.mfcc_act);
  }
  cache.layers.resize(convs_.size());
  for (size_t i = 0; i < convs_.size(); ++i) {
    Layer& l = cache.layers[i];
    h = nn::leaky_relu(norms_[i].forward(convs_[i].forward(h, l.conv), l.norm), l.act);
  }
  return out_.forward(h, cache.out).data;
}

Mat FaceGenerator::backward(const Mat& dy, const Cache& cache, bool need_input_grad) {
  SeqBatch g = out_.backward(SeqBatch::single(dy), cache.out);
  for (size_t i = convs_.size(); i-- > 0;) {
    const Layer& l = cache.layers[i];
    g = convs_[i].backward(norms_[i].backward(nn::leaky_relu_backward(g, l.act), l.norm), l.conv);
  }
  if (cfg_.path == FeaturePath::kSpeech) {
    g = proj_.backward(g, cache.proj, need_input_grad);
  } else {
    g = mfcc_conv_.backward(nn::leaky_relu_backward(g, cache.mfcc_act), cache.mfcc_conv, need_input_grad);
  }
  return need_input_grad ? g.data : Mat();
}

nn::ParamList FaceGenerator::params() {
  nn::ParamList out;
  if (cfg_.path == FeaturePath::kSpeech) {
    proj_.collect(out);
  } else {
    mfcc_conv_.collect(out);
  }
  for (size_t i = 0; i < convs_.size(); ++i) {
    convs_[i].collect(out);
    norms_[i].collect(out);
  }
  out_.collect(out);
  return out;
}

double face_mse(const FaceGenerator& model, const std::vector<FaceExample>& set) {
  require(!set.empty(), "face_mse: empty set");
  double sum = 0.0;
  double count = 0.0;
  for (const auto& ex : set) {
    const Mat pred = model.forward(ex.features);
    sum += (pred - ex.face).squaredNorm();
    count += static_cast<double>(ex.face.size());
  }
  return sum / count;
}

FaceTrainResult face_train(FaceGenerator model, const std::vector<FaceExample>& train,
                           const std::vector<FaceExample>& val, const FaceTrainHyper& hyper) {
  require(!train.empty(), "face_train: empty training set");
  require(hyper.epochs >= 0, "face_train: epochs must be non-negative");
  for (const auto& ex : train) {
    require(ex.features.rows() == ex.face.rows(), "face_train: sample '" + ex.id + "' has " +
                                                      std::to_string(ex.features.rows()) + " feature frames but " +
                                                      std::to_string(ex.face.rows()) + " face frames");
  }
  nn::ParamList params = model.params();
  nn::SgdMomentum opt(params, hyper.lr, hyper.momentum);
  Rng rng(derive_seed(hyper.seed, 0xface));

  FaceTrainResult result;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_values = nn::flatten_values(params);
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    double sum = 0.0;
    double count = 0.0;
    for (size_t idx : order) {
      const FaceExample& ex = train[idx];
      FaceGenerator::Cache cache;
      const Mat pred = model.forward(ex.features, cache);
      const Mat diff = pred - ex.face;
      const double n = static_cast<double>(diff.size());
      const double loss = diff.squaredNorm() / n;
      if (!std::isfinite(loss)) {
        throw NumericError("face_train: non-finite loss at epoch " + std::to_string(epoch) + " on sample '" + ex.id +
                           "'");
      }
      sum += diff.squaredNorm();
      count += n;
      opt.zero_grad();
      model.backward((2.0 / n) * diff, cache);
      opt.step();
    }
    FaceEpochLog entry{epoch, sum / count, val.empty() ? sum / count : face_mse(model, val)};
    result.log.push_back(entry);
    if (entry.val_mse < best) {
      best = entry.val_mse;
      best_values = nn::flatten_values(params);
      result.best_epoch = epoch;
    }
  }
  nn::assign_values(params, best_values);
  result.model = std::move(model);
  return result;
}

}  // namespace holo::face
