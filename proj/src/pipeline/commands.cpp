#include "holo/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "holo/audio/waveform.hpp"
#include "holo/metrics/discriminator.hpp"
#include "holo/motion/container.hpp"
#include "holo/pipeline/checkpoint.hpp"
#include "holo/pipeline/manifest.hpp"
#include "holo/pipeline/plot.hpp"

namespace holo::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path corpus_dir(const fs::path& root) { return root / "corpus"; }
fs::path checkpoint_path(const fs::path& root, const std::string& name) { return root / "checkpoints" / (name + ".ckpt"); }
fs::path log_path(const fs::path& root, const std::string& name) { return root / "logs" / (name + ".csv"); }

uint64_t stream_seed(const RunConfig& c, SeedStream s) { return derive_seed(c.seed, static_cast<uint64_t>(s)); }

const motion::Sample& CorpusData::get(const std::string& id) const {
  const auto it = index.find(id);
  require(it != index.end(), "corpus has no sample '" + id + "'");
  return samples[it->second];
}

std::vector<const motion::Sample*> CorpusData::subset(const std::vector<std::string>& ids) const {
  std::vector<const motion::Sample*> out;
  for (const auto& id : ids) out.push_back(&get(id));
  return out;
}

namespace {

constexpr const char* kVersion = "holo 1.0";

Manifest start_manifest(const std::string& command, const RunConfig& cfg) {
  Manifest m;
  m.command = command;
  m.config_hash = config_hash(cfg);
  m.config = to_json(cfg);
  m.config.erase("output_root");
  m.seeds["run"] = cfg.seed;
  m.seeds["code_version"] = kVersion;
  return m;
}

void require_file(const fs::path& p, const std::string& what, const std::string& command) {
  if (!fs::exists(p)) {
    throw DependencyError(what + " not found at " + p.string() + "; run `holo " + command + "` first");
  }
}

void require_corpus(const fs::path& root) {
  require_file(corpus_dir(root) / "corpus.json", "corpus", "synth-data");
}

Checkpoint open_checkpoint(const RunConfig& cfg, const fs::path& root, const std::string& name,
                           const std::string& command, std::ostream& log) {
  const fs::path p = checkpoint_path(root, name);
  require_file(p, name + " checkpoint", command);
  Checkpoint ck = read_checkpoint(p);
  if (auto w = hash_warning(ck, config_hash(cfg))) log << "warning: " << *w << "\n";
  return ck;
}

void write_csv(const fs::path& path, const std::string& header, const std::vector<std::string>& rows) {
  std::string text = header + "\n";
  for (const auto& r : rows) text += r + "\n";
  write_text_file(path, text);
}

std::vector<Mat> body_hand_windows(const std::vector<motion::Window>& ws) {
  return vq::window_parts(ws, motion::Part::kJoint);
}

// Frames usable by the VQ path: the clip truncated to a multiple of 4.
int usable_frames(const motion::Sample& s) { return s.motion.steps() - s.motion.steps() % vq::kWindowFactor; }

}  // namespace

// ----------------------------------------------------------------- corpus

void cmd_synth_data(const RunConfig& cfg, std::ostream& log) {
  const fs::path root = output_root(cfg);
  const fs::path dir = corpus_dir(root);
  fs::create_directories(dir);
  const motion::Corpus corpus = motion::synth_corpus(cfg.corpus, cfg.seed);
  const motion::DatasetSplit split = motion::split_dataset(corpus.samples, cfg.seed);
  Manifest man = start_manifest("synth-data", cfg);
  json listing = json::array();
  for (const motion::Sample& s : corpus.samples) {
    // Peak-scale into PCM16 range; loading normalizes again.
    audio::Waveform w = s.waveform;
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0) {
      for (double& v : w.samples) v *= 0.9 / peak;
    }
    const fs::path wav = dir / (s.id + ".wav");
    const fs::path mot = dir / (s.id + ".hmotion");
    audio::write_wav(wav, w);
    motion::write_motion(s.motion, mot, s.speaker.index);
    listing.push_back({{"id", s.id}, {"speaker", s.speaker.index}, {"frames", s.motion.steps()},
                       {"seconds", s.waveform.duration()}});
    man.outputs.push_back(record_file(root, wav));
    man.outputs.push_back(record_file(root, mot));
  }
  json meta;
  meta["config"] = motion::to_json(corpus.config);
  meta["seed"] = corpus.seed;
  meta["truth"] = motion::to_json(corpus.truth);
  meta["samples"] = listing;
  write_text_file(dir / "corpus.json", meta.dump(1) + "\n");
  write_text_file(dir / "split.json", motion::to_json(split).dump(1) + "\n");
  man.outputs.push_back(record_file(root, dir / "corpus.json"));
  man.outputs.push_back(record_file(root, dir / "split.json"));
  man.seeds["corpus"] = cfg.seed;
  man.seeds["split"] = cfg.seed;
  write_manifest(root, "synth-data", man);
  log << fmt::format("synth-data: {} clips ({} train / {} val / {} test) in {}\n", corpus.samples.size(),
                     split.train.size(), split.val.size(), split.test.size(), dir.string());
}

CorpusData load_corpus(const fs::path& root) {
  require_corpus(root);
  const fs::path dir = corpus_dir(root);
  const json meta = json::parse(read_text_file(dir / "corpus.json"));
  CorpusData data;
  data.config = motion::corpus_config_from_json(meta.at("config"));
  data.seed = meta.at("seed").get<uint64_t>();
  data.split = motion::dataset_split_from_json(json::parse(read_text_file(dir / "split.json")));
  for (const auto& entry : meta.at("samples")) {
    motion::Sample s;
    s.id = entry.at("id").get<std::string>();
    std::optional<int> speaker;
    s.motion = motion::read_motion(dir / (s.id + ".hmotion"), &speaker);
    s.waveform = audio::load_waveform(dir / (s.id + ".wav"));
    s.speaker = motion::SpeakerId{speaker.value_or(entry.at("speaker").get<int>()), data.config.num_speakers};
    motion::equalize_lengths(s);
    data.index[s.id] = data.samples.size();
    data.samples.push_back(std::move(s));
  }
  return data;
}

std::vector<motion::Window> split_windows(const CorpusData& data, const std::vector<std::string>& ids, int length,
                                          int stride) {
  std::vector<motion::Window> out;
  for (const motion::Sample* s : data.subset(ids)) {
    audio::AudioFeatureSeq a;
    a.frames = ar::mfcc_features(s->waveform, s->motion.steps());
    const motion::Segmentation seg = motion::segment(s->motion, a, length, stride > 0 ? stride : length);
    for (motion::Window w : seg.windows) {
      w.speaker = s->speaker.index;
      w.sample_id = s->id;
      out.push_back(std::move(w));
    }
  }
  return out;
}

// ------------------------------------------------------------------- face

void cmd_train_face(const RunConfig& cfg, std::ostream& log) {
  const fs::path root = output_root(cfg);
  const CorpusData data = load_corpus(root);
  const audio::FallbackSpeechEncoder speech;
  auto examples = [&](const std::vector<std::string>& ids) {
    std::vector<face::FaceExample> out;
    for (const motion::Sample* s : data.subset(ids)) {
      const int t = s->motion.steps();
      out.push_back({s->id, ar::face_features(s->waveform, cfg.face.feature, t, speech), s->motion.face.cast<double>()});
    }
    return out;
  };
  const auto train = examples(data.split.train);
  const auto val = examples(data.split.val);

  face::FaceGeneratorConfig fc;
  fc.path = cfg.face.feature;
  fc.hidden = cfg.face.hidden;
  fc.layers = cfg.face.layers;
  fc.seed = stream_seed(cfg, SeedStream::kFace);
  face::FaceTrainHyper hyper{cfg.face.lr, cfg.face.momentum, cfg.face.epochs, stream_seed(cfg, SeedStream::kFace)};
  face::FaceTrainResult res = face::face_train(face::FaceGenerator(fc), train, val, hyper);

  std::vector<std::string> rows;
  for (const auto& e : res.log) {
    rows.push_back(fmt::format("{},{:.9g},{:.9g}", e.epoch, e.train_mse, e.val_mse));
    log << fmt::format("train-face: epoch {:3d}  train mse {:.6f}  val mse {:.6f}\n", e.epoch, e.train_mse, e.val_mse);
  }
  const fs::path lp = log_path(root, "face");
  write_csv(lp, "epoch,train_mse,val_mse", rows);
  const fs::path ck = checkpoint_path(root, "face");
  CheckpointInfo info;
  info.config_hash = config_hash(cfg);
  info.seed = fc.seed;
  info.extra = {{"best_epoch", res.best_epoch}, {"speech_encoder_seed", speech.config().seed}};
  save_face(ck, res.model, info);

  Manifest man = start_manifest("train-face", cfg);
  man.seeds["face"] = fc.seed;
  man.inputs.push_back(record_file(root, corpus_dir(root) / "corpus.json"));
  man.inputs.push_back(record_file(root, corpus_dir(root) / "split.json"));
  man.outputs.push_back(record_file(root, ck));
  man.outputs.push_back(record_file(root, lp));
  write_manifest(root, "train-face", man);
  log << fmt::format("train-face: best epoch {} -> {}\n", res.best_epoch, ck.string());
}

// --------------------------------------------------------------------- vq

namespace {

vq::VqVaeConfig vq_config(const RunConfig& cfg, motion::Part part, int codes) {
  vq::VqVaeConfig vc;
  vc.part = part;
  vc.hidden = cfg.vq.hidden;
  vc.codebook_size = codes;
  vc.seed = stream_seed(cfg, part == motion::Part::kBody   ? SeedStream::kVqBody
                             : part == motion::Part::kHand ? SeedStream::kVqHand
                                                           : SeedStream::kVqJoint);
  return vc;
}

vq::VqTrainHyper vq_hyper(const RunConfig& cfg, uint64_t seed) {
  vq::VqTrainHyper h;
  h.lr = cfg.vq.lr;
  h.beta = cfg.vq.beta;
  h.batch_size = cfg.vq.batch_size;
  h.epochs = cfg.vq.epochs;
  h.seed = seed;
  return h;
}

int codes_for(const RunConfig& cfg, motion::Part part) {
  switch (part) {
    case motion::Part::kBody: return cfg.vq.body_codes;
    case motion::Part::kHand: return cfg.vq.hand_codes;
    case motion::Part::kJoint: return cfg.vq.joint_codes;
  }
  return 0;
}

std::string vq_name(motion::Part part) { return "vq_" + motion::to_string(part); }

}  // namespace

void cmd_train_vq(const RunConfig& cfg, motion::Part part, std::ostream& log) {
  const fs::path root = output_root(cfg);
  const CorpusData data = load_corpus(root);
  const auto train = split_windows(data, data.split.train, cfg.vq.window);
  const auto val = split_windows(data, data.split.val, cfg.vq.window);
  require(!train.empty(), "train-vq: no training windows of " + std::to_string(cfg.vq.window) + " frames");
  const vq::VqVaeConfig vc = vq_config(cfg, part, codes_for(cfg, part));
  vq::VqTrainResult res = vq::train_vqvae(vq::VqVae(vc), vq::window_parts(train, part), vq_hyper(cfg, vc.seed),
                                          vq::window_parts(val, part));
  const std::string name = vq_name(part);
  std::vector<std::string> rows;
  for (const auto& e : res.log) {
    rows.push_back(fmt::format("{},{:.9g},{:.9g},{:.9g},{:.6f},{},{}", e.epoch, e.loss, e.train_re, e.re, e.top_usage,
                               e.used_entries, e.collapse ? 1 : 0));
    log << fmt::format("train-vq[{}]: epoch {:3d}  loss {:.6f}  RE {:.6f}  codes used {}\n", motion::to_string(part),
                       e.epoch, e.loss, e.re, e.used_entries);
  }
  for (const auto& w : res.warnings) log << "warning: " << w << "\n";
  const fs::path lp = log_path(root, name);
  write_csv(lp, "epoch,loss,train_re,re,top_usage,used_entries,collapse", rows);
  const fs::path ck = checkpoint_path(root, name);
  CheckpointInfo info;
  info.config_hash = config_hash(cfg);
  info.seed = vc.seed;
  info.extra = {{"val_re", res.log.empty() ? 0.0 : res.log.back().re}, {"warnings", res.warnings}};
  save_vq(ck, res.model, info);

  Manifest man = start_manifest("train-vq-" + motion::to_string(part), cfg);
  man.seeds["vq"] = vc.seed;
  man.inputs.push_back(record_file(root, corpus_dir(root) / "corpus.json"));
  man.inputs.push_back(record_file(root, corpus_dir(root) / "split.json"));
  man.outputs.push_back(record_file(root, ck));
  man.outputs.push_back(record_file(root, lp));
  write_manifest(root, "train-vq-" + motion::to_string(part), man);
  log << fmt::format("train-vq[{}]: {} windows -> {}\n", motion::to_string(part), train.size(), ck.string());
}

// --------------------------------------------------------------------- ar

namespace {

std::vector<ar::ArExample> ar_examples(const std::vector<motion::Window>& ws, const vq::VqVae& body,
                                       const vq::VqVae& hand) {
  std::vector<ar::ArExample> out;
  for (const motion::Window& w : ws) {
    ar::ArExample ex;
    ex.id = fmt::format("{}@{}", w.sample_id, w.start);
    ex.mfcc = w.audio;
    ex.tokens.body = body.tokenize(w.body);
    ex.tokens.hand = hand.tokenize(w.hand);
    ex.speaker = w.speaker;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

void cmd_train_ar(const RunConfig& cfg, bool cross_conditional, std::ostream& log) {
  const fs::path root = output_root(cfg);
  require_corpus(root);
  const vq::VqVae body = load_vq(open_checkpoint(cfg, root, "vq_body", "train-vq --part body", log));
  const vq::VqVae hand = load_vq(open_checkpoint(cfg, root, "vq_hand", "train-vq --part hand", log));
  const CorpusData data = load_corpus(root);
  const auto train = ar_examples(split_windows(data, data.split.train, cfg.vq.window, cfg.ar.train_stride), body, hand);
  const auto val = ar_examples(split_windows(data, data.split.val, cfg.vq.window), body, hand);
  const auto test = ar_examples(split_windows(data, data.split.test, cfg.vq.window), body, hand);
  require(!train.empty(), "train-ar: no training windows");

  ar::ArConfig ac;
  ac.body_codes = body.config().codebook_size;
  ac.hand_codes = hand.config().codebook_size;
  ac.audio_hidden = cfg.ar.audio_hidden;
  ac.channels = cfg.ar.channels;
  ac.layers = cfg.ar.layers;
  ac.head_hidden = cfg.ar.head_hidden;
  ac.num_speakers = data.config.num_speakers;
  ac.cross_conditional = cross_conditional;
  ac.seed = stream_seed(cfg, cross_conditional ? SeedStream::kAr : SeedStream::kArAblation);
  ar::ArTrainHyper hyper;
  hyper.lr = cfg.ar.lr;
  hyper.batch_size = cfg.ar.batch_size;
  hyper.epochs = cfg.ar.epochs;
  hyper.seed = ac.seed;
  ar::ArTrainResult res =
      ar::ar_train(ar::ArModel(ac), train, val, body.codebook_entries(), hand.codebook_entries(), hyper);
  const double test_ppl =
      test.empty() ? std::nan("") : ar::perplexity(res.model, test, body.codebook_entries(), hand.codebook_entries());

  const std::string name = cross_conditional ? "ar" : "ar_independent";
  std::vector<std::string> rows;
  for (const auto& e : res.log) {
    rows.push_back(fmt::format("{},{:.9g},{:.9g}", e.epoch, e.train_perplexity, e.val_perplexity));
    log << fmt::format("train-ar{}: epoch {:3d}  train ppl {:.4f}  val ppl {:.4f}\n",
                       cross_conditional ? "" : "[independent]", e.epoch, e.train_perplexity, e.val_perplexity);
  }
  const fs::path lp = log_path(root, name);
  write_csv(lp, "epoch,train_perplexity,val_perplexity", rows);
  const fs::path ck = checkpoint_path(root, name);
  CheckpointInfo info;
  info.config_hash = config_hash(cfg);
  info.seed = ac.seed;
  info.extra = {{"best_epoch", res.best_epoch}, {"test_perplexity", test_ppl}};
  save_ar(ck, res.model, info);

  Manifest man = start_manifest(cross_conditional ? "train-ar" : "train-ar-independent", cfg);
  man.seeds["ar"] = ac.seed;
  man.inputs.push_back(record_file(root, corpus_dir(root) / "split.json"));
  man.inputs.push_back(record_file(root, checkpoint_path(root, "vq_body")));
  man.inputs.push_back(record_file(root, checkpoint_path(root, "vq_hand")));
  man.outputs.push_back(record_file(root, ck));
  man.outputs.push_back(record_file(root, lp));
  write_manifest(root, cross_conditional ? "train-ar" : "train-ar-independent", man);
  log << fmt::format("train-ar{}: best epoch {}, test perplexity {:.4f} -> {}\n",
                     cross_conditional ? "" : "[independent]", res.best_epoch, test_ppl, ck.string());
}

// --------------------------------------------------------------- generate

namespace {

struct LoadedModels {
  face::FaceGenerator face;
  audio::FallbackSpeechEncoder speech;
  vq::VqVae body;
  vq::VqVae hand;
  ar::ArModel prior;

  ar::GenerationModels view() const { return {&face, &speech, &body, &hand, &prior}; }
};

LoadedModels load_models(const RunConfig& cfg, const fs::path& root, std::ostream& log) {
  LoadedModels m;
  m.face = load_face(open_checkpoint(cfg, root, "face", "train-face", log));
  m.body = load_vq(open_checkpoint(cfg, root, "vq_body", "train-vq --part body", log));
  m.hand = load_vq(open_checkpoint(cfg, root, "vq_hand", "train-vq --part hand", log));
  m.prior = load_ar(open_checkpoint(cfg, root, "ar", "train-ar", log));
  return m;
}

}  // namespace

std::vector<fs::path> cmd_generate(const RunConfig& cfg, const GenerateRequest& req, std::ostream& log) {
  const fs::path root = output_root(cfg);
  require(req.samples >= 1, "generate: --samples must be at least 1");
  const LoadedModels models = load_models(cfg, root, log);
  audio::Waveform w;
  fs::path audio_path;
  if (req.audio) {
    audio_path = *req.audio;
    w = audio::load_waveform(audio_path);
  } else {
    require_corpus(root);
    const json split = json::parse(read_text_file(corpus_dir(root) / "split.json"));
    const std::string id = split.at("test").at(0).get<std::string>();
    audio_path = corpus_dir(root) / (id + ".wav");
    w = audio::load_waveform(audio_path);
  }
  const fs::path out_dir = req.out_dir.value_or(root / "generated");
  fs::create_directories(out_dir);
  Manifest man = start_manifest("generate", cfg);
  man.seeds["sampling"] = req.seed;
  man.seeds["samples"] = req.samples;
  // Clips inside the run are recorded relative to it, like every other artifact.
  const fs::path rel = fs::relative(fs::absolute(audio_path), fs::absolute(root));
  const bool inside = !rel.empty() && *rel.begin() != "..";
  man.inputs.push_back({inside ? rel.generic_string() : audio_path.generic_string(), sha256_file(audio_path)});
  for (const char* name : {"face", "vq_body", "vq_hand", "ar"}) man.inputs.push_back(record_file(root, checkpoint_path(root, name)));
  std::vector<fs::path> written;
  for (int k = 0; k < req.samples; ++k) {
    ar::SampleOptions opt;
    opt.temperature = req.temperature;
    opt.greedy = req.greedy;
    opt.seed = req.seed + static_cast<uint64_t>(k);
    const motion::MotionSequence m = ar::generate_motion(w, req.speaker, models.view(), opt);
    const fs::path out = out_dir / fmt::format("{}_seed{}.hmotion", audio_path.stem().string(), opt.seed);
    motion::write_motion(m, out, req.speaker);
    man.outputs.push_back({fs::relative(out, root).generic_string(), sha256_file(out)});
    written.push_back(out);
    log << fmt::format("generate: {} frames, seed {} -> {}\n", m.steps(), opt.seed, out.string());
  }
  write_manifest(root, "generate", man);
  return written;
}

// --------------------------------------------------------------- evaluate

metrics::MetricReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const fs::path root = output_root(cfg);
  const LoadedModels models = load_models(cfg, root, log);
  const CorpusData data = load_corpus(root);
  const auto test_clips = data.subset(data.split.test);
  require(!test_clips.empty(), "evaluate: the test split is empty");

  double l2_sum = 0.0, lvd_sum = 0.0;
  std::vector<Mat> generated, generated_windows, real_windows;
  json per_clip = json::array();
  for (const motion::Sample* s : test_clips) {
    const int frames = std::min(ar::motion_frames(s->waveform), usable_frames(*s));
    const Mat gt_face = s->motion.face.topRows(frames).cast<double>();
    const Mat pred_face = models.face.forward(ar::face_features(s->waveform, models.face.config().path, frames, models.speech));
    const double l2 = metrics::l2_landmark(pred_face, gt_face);
    const double lv = metrics::lvd(pred_face, gt_face);
    l2_sum += l2;
    lvd_sum += lv;
    per_clip.push_back({{"id", s->id}, {"l2", l2}, {"lvd", lv}});
    const Mat mfcc = ar::mfcc_features(s->waveform, frames);
    for (int k = 0; k < cfg.eval.samples_per_clip; ++k) {
      ar::SampleOptions opt;
      opt.seed = derive_seed(stream_seed(cfg, SeedStream::kEvalSampling), static_cast<uint64_t>(k));
      const ar::IndexPairSequence idx = ar::ar_sample(models.prior, mfcc, s->speaker.index,
                                                      models.body.codebook_entries(), models.hand.codebook_entries(), opt);
      Mat bh(frames, motion::kBodyHandDim);
      bh << models.body.decode(vq::lookup(idx.body, models.body.codebook())),
          models.hand.decode(vq::lookup(idx.hand, models.hand.codebook()));
      for (int start = 0; start + cfg.vq.window <= frames; start += cfg.vq.window) {
        generated_windows.push_back(bh.middleRows(start, cfg.vq.window));
      }
      generated.push_back(std::move(bh));
    }
  }
  const auto test_windows = split_windows(data, data.split.test, cfg.vq.window);
  real_windows = body_hand_windows(test_windows);
  require(!real_windows.empty() && !generated_windows.empty(), "evaluate: test clips are shorter than one window");

  metrics::MetricReport report;
  report.l2 = l2_sum / static_cast<double>(test_clips.size());
  report.lvd = lvd_sum / static_cast<double>(test_clips.size());
  report.variation = metrics::variation(generated);
  report.re = vq::compositional_reconstruction_error(models.body, models.hand,
                                                     vq::window_parts(test_windows, motion::Part::kBody),
                                                     vq::window_parts(test_windows, motion::Part::kHand));
  metrics::DiscTrainHyper dh;
  dh.lr = cfg.eval.disc_lr;
  dh.epochs = cfg.eval.disc_epochs;
  dh.batch_size = cfg.eval.disc_batch;
  dh.test_fraction = cfg.eval.test_fraction;
  dh.seed = stream_seed(cfg, SeedStream::kDiscriminator);
  metrics::DiscriminatorConfig dc;
  dc.hidden = cfg.eval.disc_hidden;
  dc.seed = dh.seed;
  metrics::DiscTrainResult disc = metrics::train_discriminator(real_windows, generated_windows, dh, dc);
  for (const auto& w : disc.warnings) log << "warning: " << w << "\n";
  std::vector<Mat> test_fakes;
  for (size_t i : disc.test_fake) test_fakes.push_back(generated_windows[i]);
  report.rs = metrics::realism_score(test_fakes, disc.model);
  report.n_samples = static_cast<int>(generated.size());
  report.config_hash = config_hash(cfg);
  report.sample_set = fmt::format("test split: {} clips x {} sampling seeds", test_clips.size(), cfg.eval.samples_per_clip);
  metrics::validate(report);

  std::vector<Mat> gt_motion;
  for (const motion::Sample* s : test_clips) gt_motion.push_back(s->motion.body_hand());
  const fs::path eval_dir = root / "eval";
  write_text_file(eval_dir / "report.txt", report.to_text());
  write_text_file(eval_dir / "report.csv", metrics::MetricReport::csv_header() + "\n" + report.csv_row() + "\n");
  json details;
  details["per_clip"] = per_clip;
  details["discriminator_heldout_accuracy"] = disc.heldout_accuracy;
  details["variation_ground_truth"] = metrics::variation(gt_motion);
  details["real_windows"] = real_windows.size();
  details["generated_windows"] = generated_windows.size();
  write_text_file(eval_dir / "details.json", details.dump(1) + "\n");
  CheckpointInfo info;
  info.config_hash = report.config_hash;
  info.seed = dh.seed;
  save_discriminator(checkpoint_path(root, "discriminator"), disc.model, info);

  Manifest man = start_manifest("evaluate", cfg);
  man.seeds["discriminator"] = dh.seed;
  man.seeds["sampling"] = stream_seed(cfg, SeedStream::kEvalSampling);
  man.inputs.push_back(record_file(root, corpus_dir(root) / "split.json"));
  for (const char* name : {"face", "vq_body", "vq_hand", "ar"}) man.inputs.push_back(record_file(root, checkpoint_path(root, name)));
  for (const char* f : {"report.txt", "report.csv", "details.json"}) man.outputs.push_back(record_file(root, eval_dir / f));
  man.outputs.push_back(record_file(root, checkpoint_path(root, "discriminator")));
  write_manifest(root, "evaluate", man);
  log << report.to_text();
  return report;
}

// ------------------------------------------------------------------- plot

std::vector<fs::path> cmd_plot(const RunConfig& cfg, std::ostream& log) {
  const fs::path root = output_root(cfg);
  const fs::path dir = root / "plots";
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    const fs::path p = dir / name;
    write_text_file(p, svg);
    written.push_back(p);
    log << "plot: " << p.string() << "\n";
  };
  if (fs::exists(log_path(root, "face"))) {
    const CsvTable t = read_csv(log_path(root, "face"));
    const auto e = t.numbers("epoch");
    emit("face_training.svg", svg_line_chart("Face generator", "epoch", "MSE",
                                             {{"train", e, t.numbers("train_mse")}, {"validation", e, t.numbers("val_mse")}}));
  }
  std::vector<Series> vq_series;
  for (const char* part : {"body", "hand", "joint"}) {
    const fs::path p = log_path(root, std::string("vq_") + part);
    if (!fs::exists(p)) continue;
    const CsvTable t = read_csv(p);
    vq_series.push_back({part, t.numbers("epoch"), t.numbers("re")});
  }
  if (!vq_series.empty()) emit("vq_reconstruction.svg", svg_line_chart("VQ reconstruction error", "epoch", "RE", vq_series));
  std::vector<Series> ar_series;
  for (const auto& [file, label] : {std::pair{"ar", "cross-conditional"}, std::pair{"ar_independent", "independent"}}) {
    const fs::path p = log_path(root, file);
    if (!fs::exists(p)) continue;
    const CsvTable t = read_csv(p);
    ar_series.push_back({std::string(label) + " (val)", t.numbers("epoch"), t.numbers("val_perplexity")});
  }
  if (!ar_series.empty()) emit("ar_perplexity.svg", svg_line_chart("Prior perplexity per token", "epoch", "perplexity", ar_series));
  if (fs::exists(root / "eval" / "re_sweep.csv")) {
    const CsvTable t = read_csv(root / "eval" / "re_sweep.csv");
    const auto total = t.numbers("total_codes");
    emit("codebook_sweep.svg", svg_line_chart("Compositional vs joint codebooks", "total codebook entries", "RE",
                                              {{"compositional", total, t.numbers("compositional_re")},
                                               {"joint", total, t.numbers("joint_re")}}));
  }
  if (fs::exists(root / "eval" / "report.txt")) {
    const metrics::MetricReport r = metrics::parse_metric_report(read_text_file(root / "eval" / "report.txt"));
    auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : std::string("-"); };
    emit("metrics_table.svg", svg_table("Evaluation (" + r.sample_set + ")", {"L2", "LVD", "RS", "Variation", "RE"},
                                        {{cell(r.l2), cell(r.lvd), cell(r.rs), cell(r.variation), cell(r.re)}}));
  }
  if (written.empty()) {
    throw DependencyError("nothing to plot under " + root.string() + "; run `holo train-face` first");
  }
  Manifest man = start_manifest("plot", cfg);
  for (const auto& p : written) man.outputs.push_back(record_file(root, p));
  write_manifest(root, "plot", man);
  return written;
}

// ------------------------------------------------------------------ sweep

void cmd_sweep_codebooks(const RunConfig& cfg, std::ostream& log) {
  const fs::path root = output_root(cfg);
  const CorpusData data = load_corpus(root);
  const auto train = split_windows(data, data.split.train, cfg.vq.window);
  const auto val = split_windows(data, data.split.val, cfg.vq.window);
  const auto test = split_windows(data, data.split.test, cfg.vq.window);
  std::vector<std::string> rows;
  for (int k : cfg.vq.sweep_sizes) {
    auto train_one = [&](motion::Part part, int codes) {
      const vq::VqVaeConfig vc = vq_config(cfg, part, codes);
      return vq::train_vqvae(vq::VqVae(vc), vq::window_parts(train, part), vq_hyper(cfg, vc.seed),
                             vq::window_parts(val, part))
          .model;
    };
    const vq::VqVae body = train_one(motion::Part::kBody, k);
    const vq::VqVae hand = train_one(motion::Part::kHand, k);
    const vq::VqVae joint = train_one(motion::Part::kJoint, 2 * k);
    const double comp = vq::compositional_reconstruction_error(body, hand, vq::window_parts(test, motion::Part::kBody),
                                                               vq::window_parts(test, motion::Part::kHand));
    const double single = vq::reconstruction_error(joint, vq::window_parts(test, motion::Part::kJoint));
    rows.push_back(fmt::format("{},{},{:.9g},{:.9g}", k, 2 * k, comp, single));
    log << fmt::format("sweep-codebooks: K={} compositional RE {:.6f}, joint ({}) RE {:.6f}\n", k, comp, 2 * k, single);
  }
  const fs::path out = root / "eval" / "re_sweep.csv";
  write_csv(out, "codes_per_part,total_codes,compositional_re,joint_re", rows);
  Manifest man = start_manifest("sweep-codebooks", cfg);
  man.inputs.push_back(record_file(root, corpus_dir(root) / "split.json"));
  man.outputs.push_back(record_file(root, out));
  write_manifest(root, "sweep-codebooks", man);
}

}  // namespace holo::pipeline
