#pragma once

#include "holo/ar/crosscond.hpp"
#include "holo/audio/speech_encoder.hpp"
#include "holo/face/face_generator.hpp"
#include "holo/motion/motion.hpp"
#include "holo/vq/vqvae.hpp"

namespace holo::ar {

// Motion frames for a waveform: floor(duration * 30), truncated to a
// multiple of 4.
int motion_frames(const audio::Waveform& w);

// Frame-aligned face-generator input for the first `frames` motion frames.
// The speech path aligns backbone frames to the full clip first.
Mat face_features(const audio::Waveform& w, face::FeaturePath path, int frames,
                  const audio::FallbackSpeechEncoder& speech);
// The first `frames` MFCC frames.
Mat mfcc_features(const audio::Waveform& w, int frames);

struct GenerationModels {
  const face::FaceGenerator* face = nullptr;
  const audio::FallbackSpeechEncoder* speech = nullptr;
  const vq::VqVae* body = nullptr;
  const vq::VqVae* hand = nullptr;
  const ArModel* prior = nullptr;
};

// Face from the deterministic generator; body and hand from sampled tokens,
// codebook lookup and the VQ decoders.
motion::MotionSequence generate_motion(const audio::Waveform& w, int speaker, const GenerationModels& models,
                                       const SampleOptions& opt);

}  // namespace holo::ar
