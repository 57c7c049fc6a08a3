#include "holo/audio/speech_encoder.hpp"

#include <cmath>

#include "holo/error.hpp"
#include "holo/motion/container.hpp"

namespace holo::audio {

namespace {

// He-normal initialization keeps activation scale roughly constant through
// the leaky-ReLU stack; biases start at zero.
void he_init(nn::Param& w, nn::Param& b, int fan_in, Rng& rng) {
  const double std_dev = std::sqrt(2.0 / fan_in);
  for (Eigen::Index i = 0; i < w.value.size(); ++i) w.value.data()[i] = std_dev * rng.normal();
  b.value.setZero();
}

}  // namespace

FallbackSpeechEncoder::FallbackSpeechEncoder(const SpeechEncoderConfig& cfg) : cfg_(cfg) {
  Rng rng(cfg.seed);
  int in = 1;
  for (int i = 0; i < 4; ++i) {
    const int s = cfg.strides[static_cast<size_t>(i)];
    const int out = cfg.channels[static_cast<size_t>(i)];
    convs_[static_cast<size_t>(i)] =
        nn::Conv1d("speech.conv" + std::to_string(i),
                   nn::Conv1d::Options{.in = in, .out = out, .kernel = 2 * s, .stride = s, .pad_left = s / 2,
                                       .pad_right = s - s / 2},
                   rng);
    he_init(convs_[static_cast<size_t>(i)].weight, convs_[static_cast<size_t>(i)].bias, in * 2 * s, rng);
    in = out;
  }
  mix0_ = nn::Conv1d("speech.mix0",
                     nn::Conv1d::Options{.in = in, .out = cfg.backbone_dim, .kernel = 3, .stride = 1, .pad_left = 1,
                                         .pad_right = 1},
                     rng);
  he_init(mix0_.weight, mix0_.bias, in * 3, rng);
  mix1_ = nn::Linear("speech.mix1", cfg.backbone_dim, cfg.backbone_dim, rng);
  he_init(mix1_.weight, mix1_.bias, cfg.backbone_dim, rng);
  projection_ = nn::Linear("speech.proj", cfg.backbone_dim, cfg.embed_dim, rng);
}

int FallbackSpeechEncoder::total_stride() const {
  int s = 1;
  for (int v : cfg_.strides) s *= v;
  return s;
}

double FallbackSpeechEncoder::native_rate(int sample_rate) const {
  return static_cast<double>(sample_rate) / total_stride();
}

std::pair<long, long> FallbackSpeechEncoder::receptive_field(int frame) const {
  // Walk an output interval back through each layer:
  // [a, b] -> [a * s - pad_left, b * s - pad_left + k - 1].
  long lo = frame - 1;
  long hi = frame + 1;
  for (int i = 3; i >= 0; --i) {
    const auto& o = convs_[static_cast<size_t>(i)].options();
    lo = lo * o.stride - o.pad_left;
    hi = hi * o.stride - o.pad_left + o.kernel - 1;
  }
  return {lo, hi};
}

SeqBatch FallbackSpeechEncoder::backbone_forward(const SeqBatch& samples, Cache& cache) {
  SeqBatch h = samples;
  for (size_t i = 0; i < 4; ++i) h = nn::leaky_relu(convs_[i].forward(h, cache.convs[i]), cache.conv_acts[i]);
  h = nn::leaky_relu(mix0_.forward(h, cache.mix0), cache.mix0_act);
  return nn::leaky_relu(mix1_.forward(h, cache.mix1), cache.mix1_act);
}

void FallbackSpeechEncoder::backbone_backward(const SeqBatch& dy, const Cache& cache) {
  SeqBatch g = mix1_.backward(nn::leaky_relu_backward(dy, cache.mix1_act), cache.mix1);
  g = mix0_.backward(nn::leaky_relu_backward(g, cache.mix0_act), cache.mix0);
  for (size_t i = 4; i-- > 0;) {
    g = convs_[i].backward(nn::leaky_relu_backward(g, cache.conv_acts[i]), cache.convs[i], i > 0);
  }
}

AudioFeatureSeq FallbackSpeechEncoder::backbone(const Waveform& w) const {
  validate(w);
  const auto n = static_cast<Eigen::Index>(w.samples.size());
  require(n >= total_stride(), "speech backbone: audio shorter than one frame (" + std::to_string(total_stride()) +
                                   " samples)");
  Mat x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = w.samples[static_cast<size_t>(i)];
  SeqBatch h = SeqBatch::single(std::move(x));
  for (const auto& conv : convs_) h = nn::leaky_relu(conv.forward(h));
  h = nn::leaky_relu(mix0_.forward(h));
  h = nn::leaky_relu(mix1_.forward(h));
  AudioFeatureSeq out;
  out.kind = FeatureKind::kSpeech768;
  out.frame_rate = native_rate(w.sample_rate);
  out.frames = std::move(h.data);
  return out;
}

AudioFeatureSeq FallbackSpeechEncoder::embed(const Waveform& w) const {
  AudioFeatureSeq b = backbone(w);
  AudioFeatureSeq out;
  out.kind = FeatureKind::kSpeech256;
  out.frame_rate = b.frame_rate;
  out.frames = projection_.forward(SeqBatch::single(std::move(b.frames))).data;
  return out;
}

void FallbackSpeechEncoder::collect_backbone(nn::ParamList& out) {
  for (auto& c : convs_) c.collect(out);
  mix0_.collect(out);
  mix1_.collect(out);
}

AudioFeatureSeq ExternalEmbeddingProvider::embed(const Waveform& w) const {
  validate(w);
  if (!std::filesystem::exists(dump_)) {
    throw UnavailableError("external speech embedding provider unavailable: no embedding dump at '" + dump_.string() +
                           "'; use the bundled fallback backend instead (speech_backend = \"fallback\")");
  }
  const motion::Container c = motion::read_container(dump_);
  const Mat part = c.part("audio");
  AudioFeatureSeq out;
  out.kind = FeatureKind::kSpeech256;
  out.frames = part;
  out.frame_rate = c.header.value("fps", kMotionFrameRate);
  validate(out);
  return out;
}

AudioFeatureSeq speech_embedding(const Waveform& w, const EmbeddingProvider& backend) {
  AudioFeatureSeq out = backend.embed(w);
  validate(out);
  return out;
}

}  // namespace holo::audio
