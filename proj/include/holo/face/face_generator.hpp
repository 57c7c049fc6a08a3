#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "holo/audio/features.hpp"
#include "holo/nn/layers.hpp"

namespace holo::face {

enum class FeaturePath { kSpeech, kMfcc };
std::string to_string(FeaturePath p);
FeaturePath feature_path_from_string(const std::string& s);
audio::FeatureKind input_kind(FeaturePath p);

struct FaceGeneratorConfig {
  FeaturePath path = FeaturePath::kSpeech;
  int embed_dim = 256;  // encoder output
  int hidden = 64;      // decoder channels
  int layers = 6;       // temporal convolution layers
  uint64_t seed = 1;
  bool zero_final_layer = false;
};

// Audio features -> 103-dim face parameters per frame.
//   speech path: 768-dim backbone frames -> linear projection to 256
//   mfcc path:   64-dim MFCC -> conv (k3) + leaky ReLU up to 256
// then `layers` x [conv k3/s1/p1 -> layer norm -> leaky ReLU] and a linear
// output layer.
class FaceGenerator {
 public:
  struct Layer {
    nn::Conv1d::Cache conv;
    nn::LayerNorm::Cache norm;
    nn::ActCache act;
  };
  struct Cache {
    nn::Linear::Cache proj;
    nn::Conv1d::Cache mfcc_conv;
    nn::ActCache mfcc_act;
    std::vector<Layer> layers;
    nn::Linear::Cache out;
  };

  FaceGenerator() = default;
  explicit FaceGenerator(const FaceGeneratorConfig& cfg);

  Mat forward(const audio::AudioFeatureSeq& a) const;
  // Raw-matrix variants; features must have input_dim() columns.
  Mat forward(const Mat& features) const;
  Mat forward(const Mat& features, Cache& cache);
  // Returns the gradient with respect to the input features.
  Mat backward(const Mat& dy, const Cache& cache, bool need_input_grad = false);

  nn::ParamList params();
  int input_dim() const;
  const FaceGeneratorConfig& config() const { return cfg_; }
  // Receptive-field half width in frames (one per k3 convolution).
  int receptive_radius() const;

 private:
  FaceGeneratorConfig cfg_;
  nn::Linear proj_;
  nn::Conv1d mfcc_conv_;
  std::vector<nn::Conv1d> convs_;
  std::vector<nn::LayerNorm> norms_;
  nn::Linear out_;
};

struct FaceExample {
  std::string id;
  Mat features;  // T x input_dim, aligned to the motion frames
  Mat face;      // T x 103
};

struct FaceTrainHyper {
  double lr = 0.001;
  double momentum = 0.9;
  int epochs = 100;
  uint64_t seed = 1;
};

struct FaceEpochLog {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct FaceTrainResult {
  FaceGenerator model;  // parameters of the epoch with the lowest validation MSE
  std::vector<FaceEpochLog> log;
  int best_epoch = 0;
};

double face_mse(const FaceGenerator& model, const std::vector<FaceExample>& set);

// SGD with momentum, one full-length clip per step, MSE loss.
FaceTrainResult face_train(FaceGenerator model, const std::vector<FaceExample>& train,
                           const std::vector<FaceExample>& val, const FaceTrainHyper& hyper);

// Landmark stand-ins: a fixed 23 x 103 linear map (3 jaw rows + 20 random
// projections of the expression coefficients).
inline constexpr int kLandmarkCount = 23;

struct LandmarkProxy {
  Mat map;  // 23 x 103

  Mat apply(const Mat& face) const;
};

// Parsed from the CSV compiled into the library.
const LandmarkProxy& default_landmark_proxy();
// The generator the shipped CSV was produced with.
LandmarkProxy generate_landmark_proxy(uint64_t seed);
inline constexpr uint64_t kLandmarkProxySeed = 0x1a9dULL;
LandmarkProxy parse_landmark_proxy(const std::string& csv);
std::string format_landmark_proxy(const LandmarkProxy& p);

Mat landmark_proxy(const Mat& face);

}  // namespace holo::face
