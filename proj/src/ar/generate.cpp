#include "holo/ar/generate.hpp"

#include <cmath>

namespace holo::ar {

int motion_frames(const audio::Waveform& w) {
  audio::validate(w);
  const auto full = static_cast<long>(std::floor(static_cast<double>(w.samples.size()) * motion::kFps /
                                                 static_cast<double>(w.sample_rate) + 1e-9));
  return static_cast<int>(full - full % vq::kWindowFactor);
}

Mat mfcc_features(const audio::Waveform& w, int frames) {
  const audio::AudioFeatureSeq f = audio::mfcc(w);
  require(f.steps() >= frames, "mfcc_features: only " + std::to_string(f.steps()) + " frames available, " +
                                   std::to_string(frames) + " requested");
  return f.frames.topRows(frames);
}

Mat face_features(const audio::Waveform& w, face::FeaturePath path, int frames,
                  const audio::FallbackSpeechEncoder& speech) {
  if (path == face::FeaturePath::kMfcc) return mfcc_features(w, frames);
  const auto full = static_cast<int>(std::floor(static_cast<double>(w.samples.size()) * motion::kFps /
                                                static_cast<double>(w.sample_rate) + 1e-9));
  require(full >= frames, "face_features: clip too short");
  return audio::align_to_frames(speech.backbone(w), full).frames.topRows(frames);
}

motion::MotionSequence generate_motion(const audio::Waveform& w, int speaker, const GenerationModels& models,
                                       const SampleOptions& opt) {
  require(models.face && models.speech && models.body && models.hand && models.prior,
          "generate_motion: all trained models are required");
  const int frames = motion_frames(w);
  require(frames >= vq::kWindowFactor, "generate_motion: audio of " + std::to_string(w.duration()) +
                                           " s is shorter than one token window (4 frames)");
  motion::MotionSequence m;
  m.fps = motion::kFps;
  m.face = models.face->forward(face_features(w, models.face->config().path, frames, *models.speech)).cast<float>();

  const IndexPairSequence idx = ar_sample(*models.prior, mfcc_features(w, frames), speaker,
                                          models.body->codebook_entries(), models.hand->codebook_entries(), opt);
  m.body = models.body->decode(vq::lookup(idx.body, models.body->codebook())).cast<float>();
  m.hand = models.hand->decode(vq::lookup(idx.hand, models.hand->codebook())).cast<float>();
  motion::validate(m);
  return m;
}

}  // namespace holo::ar
