#include "holo/ar/crosscond.hpp"

#include <cmath>
#include <limits>

#include "holo/nn/optim.hpp"

namespace holo::ar {

void validate(const IndexPairSequence& s, int body_codes, int hand_codes) {
  require(s.body.size() == s.hand.size(), "index pair sequence: body and hand lengths differ");
  for (size_t t = 0; t < s.body.size(); ++t) {
    require(s.body[t] >= 0 && s.body[t] < body_codes,
            "body index " + std::to_string(s.body[t]) + " at step " + std::to_string(t) + " out of range");
    require(s.hand[t] >= 0 && s.hand[t] < hand_codes,
            "hand index " + std::to_string(s.hand[t]) + " at step " + std::to_string(t) + " out of range");
  }
}

// ------------------------------------------------------------------ trunk

GatedTrunk::GatedTrunk(const std::string& name, const std::vector<Visibility>& inputs, int channels, int layers,
                       int num_speakers, Rng& rng)
    : channels_(channels) {
  require(layers >= 1 && channels >= 1 && num_speakers >= 1, "GatedTrunk: invalid shape");
  const int in = static_cast<int>(inputs.size());
  for (int l = 0; l < layers; ++l) {
    const std::string ln = name + ".layer" + std::to_string(l);
    const int lin = l == 0 ? in : channels;
    convs_.emplace_back(ln + ".conv", nn::Conv1d::Options{lin, 2 * channels, 3, 1, 2, 0, true}, rng);
    outs_.emplace_back(ln + ".out", channels, channels, rng);
    speaker_bias_.emplace_back(ln + ".speaker", Mat::Zero(num_speakers, 2 * channels));
  }
  // Tap 2 is the current step; tap 0/1 are t-2/t-1.
  Mat mask = Mat::Ones(2 * channels, 3 * in);
  for (int c = 0; c < in; ++c) {
    if (inputs[static_cast<size_t>(c)] == Visibility::kHidden) {
      for (int tap = 0; tap < 3; ++tap) mask.col(tap * in + c).setZero();
    } else if (inputs[static_cast<size_t>(c)] == Visibility::kPast) {
      mask.col(2 * in + c).setZero();
    }
  }
  convs_[0].set_mask(mask);
}

SeqBatch GatedTrunk::run(const SeqBatch& x, const std::vector<int>& speakers, Cache* cache) const {
  require(static_cast<int>(speakers.size()) == x.batch, "GatedTrunk: one speaker per sequence required");
  const Eigen::Index c = channels_;
  if (cache) {
    cache->layers.assign(convs_.size(), {});
    cache->speakers = speakers;
  }
  SeqBatch h = x;
  for (size_t l = 0; l < convs_.size(); ++l) {
    SeqBatch u = cache ? convs_[l].forward(h, cache->layers[l].conv) : convs_[l].forward(h);
    for (int b = 0; b < u.batch; ++b) u.sequence(b).rowwise() += speaker_bias_[l].value.row(speakers[static_cast<size_t>(b)]);
    Mat f = u.data.leftCols(c).array().tanh();
    Mat g = (1.0 + (-u.data.rightCols(c).array()).exp()).inverse();
    SeqBatch y(f.cwiseProduct(g), u.batch, u.steps);
    SeqBatch o = cache ? outs_[l].forward(y, cache->layers[l].out) : outs_[l].forward(y);
    if (l == 0) {
      h = std::move(o);
    } else {
      h.data += o.data;
    }
    if (cache) {
      cache->layers[l].filter = std::move(f);
      cache->layers[l].gate = std::move(g);
    }
  }
  return h;
}

SeqBatch GatedTrunk::forward(const SeqBatch& x, const std::vector<int>& speakers) const {
  return run(x, speakers, nullptr);
}

SeqBatch GatedTrunk::forward(const SeqBatch& x, const std::vector<int>& speakers, Cache& cache) const {
  return run(x, speakers, &cache);
}

SeqBatch GatedTrunk::backward(const SeqBatch& dh_in, const Cache& cache) {
  SeqBatch dh = dh_in;
  for (size_t li = convs_.size(); li-- > 0;) {
    const auto& lc = cache.layers[li];
    const SeqBatch dy = outs_[li].backward(dh, lc.out);
    const auto& f = lc.filter;
    const auto& g = lc.gate;
    SeqBatch du(dy.batch, dy.steps, 2 * channels_);
    du.data.leftCols(channels_) = (dy.data.array() * g.array() * (1.0 - f.array().square())).matrix();
    du.data.rightCols(channels_) = (dy.data.array() * f.array() * g.array() * (1.0 - g.array())).matrix();
    for (int b = 0; b < du.batch; ++b) {
      speaker_bias_[li].grad.row(cache.speakers[static_cast<size_t>(b)]) += du.sequence(b).colwise().sum();
    }
    SeqBatch dx = convs_[li].backward(du, lc.conv, true);
    if (li == 0) {
      dh = std::move(dx);
    } else {
      dh.data += dx.data;
    }
  }
  return dh;
}

void GatedTrunk::collect(nn::ParamList& out) {
  for (size_t l = 0; l < convs_.size(); ++l) {
    convs_[l].collect(out);
    outs_[l].collect(out);
    out.push_back(&speaker_bias_[l]);
  }
}

// ------------------------------------------------------------------- head

Head::Head(const std::string& name, int in, int hidden, int out, bool zero_output, Rng& rng)
    : hidden_(name + ".hidden", in, hidden, rng), out_(name + ".out", hidden, out, rng) {
  if (zero_output) {
    out_.weight.value.setZero();
    out_.bias.value.setZero();
  }
}

SeqBatch Head::forward(const SeqBatch& x) const { return out_.forward(nn::leaky_relu(hidden_.forward(x))); }

SeqBatch Head::forward(const SeqBatch& x, Cache& cache) const {
  return out_.forward(nn::leaky_relu(hidden_.forward(x, cache.hidden), cache.act), cache.out);
}

SeqBatch Head::backward(const SeqBatch& dy, const Cache& cache) {
  return hidden_.backward(nn::leaky_relu_backward(out_.backward(dy, cache.out), cache.act), cache.hidden);
}

void Head::collect(nn::ParamList& out) {
  hidden_.collect(out);
  out_.collect(out);
}

// ------------------------------------------------------------------ model

namespace {

std::vector<Visibility> trunk_inputs(bool see_body, bool see_hand) {
  std::vector<Visibility> v;
  for (int i = 0; i < vq::kCodeDim; ++i) v.push_back(see_body ? Visibility::kPast : Visibility::kHidden);
  for (int i = 0; i < vq::kCodeDim; ++i) v.push_back(see_hand ? Visibility::kPast : Visibility::kHidden);
  for (int i = 0; i < vq::kCodeDim; ++i) v.push_back(Visibility::kPastAndCurrent);
  return v;
}

Mat gather_rows(const Mat& entries, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), entries.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < entries.rows(), "code index " + std::to_string(idx[i]) + " out of range");
    out.row(static_cast<Eigen::Index>(i)) = entries.row(idx[i]);
  }
  return out;
}

}  // namespace

ArModel::ArModel(const ArConfig& cfg) : cfg_(cfg) {
  require(cfg.body_codes >= 1 && cfg.hand_codes >= 1, "ArModel: codebook sizes must be positive");
  require(cfg.num_speakers >= 1, "ArModel: at least one speaker required");
  Rng rng(cfg.seed);
  audio_ = nn::TemporalEncoder("ar.audio", {cfg.audio_dim, cfg.audio_hidden, vq::kCodeDim}, rng);
  // Both variants have the same two trunks; the ablation only hides the
  // other part's codes from each of them.
  const bool cross = cfg.cross_conditional;
  trunk_body_ = GatedTrunk("ar.trunk_body", trunk_inputs(true, cross), cfg.channels, cfg.layers, cfg.num_speakers, rng);
  trunk_hand_ = GatedTrunk("ar.trunk_hand", trunk_inputs(cross, true), cfg.channels, cfg.layers, cfg.num_speakers, rng);
  body_head_ = Head("ar.body_head", cfg.channels, cfg.head_hidden, cfg.body_codes, cfg.zero_heads, rng);
  const int hand_in = cfg.channels + (cfg.cross_conditional ? vq::kCodeDim : 0);
  hand_head_ = Head("ar.hand_head", hand_in, cfg.head_hidden, cfg.hand_codes, cfg.zero_heads, rng);
  Mat norm = Mat::Zero(4, vq::kCodeDim);
  norm.row(1).setOnes();
  norm.row(3).setOnes();
  code_norm_ = nn::Param("ar.code_norm", std::move(norm));
}

void ArModel::set_code_statistics(const Mat& body_entries, const Mat& hand_entries) {
  require(body_entries.cols() == vq::kCodeDim && hand_entries.cols() == vq::kCodeDim,
          "set_code_statistics: codebook entries must have 64 channels");
  const Mat* entries[2] = {&body_entries, &hand_entries};
  for (int which = 0; which < 2; ++which) {
    const Mat& e = *entries[which];
    const RowVec mean = e.colwise().mean();
    const RowVec var = (e.rowwise() - mean).array().square().colwise().mean();
    code_norm_.value.row(2 * which) = mean;
    // A channel that does not vary across entries is only centred.
    code_norm_.value.row(2 * which + 1) =
        var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; });
  }
}

Mat ArModel::normalize_codes(const Mat& codes, int which) const {
  const auto mean = code_norm_.value.row(2 * which);
  const auto inv = code_norm_.value.row(2 * which + 1);
  return ((codes.rowwise() - mean).array().rowwise() * inv.array()).matrix();
}

Mat ArModel::normalize_window(const Mat& window_input) const {
  const Eigen::Index k = vq::kCodeDim;
  Mat out = window_input;
  out.leftCols(k) = normalize_codes(window_input.leftCols(k), 0);
  out.middleCols(k, k) = normalize_codes(window_input.middleCols(k, k), 1);
  return out;
}

void ArModel::check_speakers(const std::vector<int>& speakers) const {
  for (int s : speakers) {
    require(s >= 0 && s < cfg_.num_speakers, "speaker index " + std::to_string(s) + " out of range [0, " +
                                                 std::to_string(cfg_.num_speakers) + ")");
  }
}

Mat ArModel::encode_audio(const Mat& mfcc) const {
  require(mfcc.cols() == cfg_.audio_dim, "encode_audio: expected " + std::to_string(cfg_.audio_dim) +
                                             " feature channels, got " + std::to_string(mfcc.cols()));
  require(mfcc.rows() > 0 && mfcc.rows() % nn::TemporalEncoder::kDownsample == 0,
          "encode_audio: frame count must be a positive multiple of 4");
  return audio_.forward(SeqBatch::single(mfcc)).data;
}

ArModel::Forward ArModel::forward_tokens(const SeqBatch& audio, const SeqBatch& zb, const SeqBatch& zh,
                                         const std::vector<int>& speakers, Cache* cache) const {
  check_speakers(speakers);
  const SeqBatch nb(normalize_codes(zb.data, 0), zb.batch, zb.steps);
  const SeqBatch nh(normalize_codes(zh.data, 1), zh.batch, zh.steps);
  const SeqBatch x = concat_channels({&nb, &nh, &audio});
  Forward out;
  const SeqBatch hb = cache ? trunk_body_.forward(x, speakers, cache->trunk_body) : trunk_body_.forward(x, speakers);
  out.body_logits = cache ? body_head_.forward(hb, cache->body_head) : body_head_.forward(hb);
  SeqBatch hand_in = cache ? trunk_hand_.forward(x, speakers, cache->trunk_hand) : trunk_hand_.forward(x, speakers);
  if (cfg_.cross_conditional) hand_in = concat_channels({&hand_in, &nb});
  out.hand_logits = cache ? hand_head_.forward(hand_in, cache->hand_head) : hand_head_.forward(hand_in);
  return out;
}

ArLogits ArModel::logits(const Mat& body_codes, const Mat& hand_codes, const Mat& audio_tokens, int speaker) const {
  const Eigen::Index tau = audio_tokens.rows();
  require(tau > 0, "ar_logits: zero-length token sequence");
  require(body_codes.rows() == tau && hand_codes.rows() == tau, "ar_logits: body, hand and audio lengths differ");
  require(body_codes.cols() == vq::kCodeDim && hand_codes.cols() == vq::kCodeDim &&
              audio_tokens.cols() == vq::kCodeDim,
          "ar_logits: inputs must have 64 channels");
  Forward f = forward_tokens(SeqBatch::single(audio_tokens), SeqBatch::single(body_codes),
                             SeqBatch::single(hand_codes), {speaker}, nullptr);
  return ArLogits{std::move(f.body_logits.data), std::move(f.hand_logits.data)};
}

RowVec ArModel::body_step(const Mat& window_input, int pos, int speaker) const {
  check_speakers({speaker});
  const SeqBatch h = trunk_body_.forward(SeqBatch::single(normalize_window(window_input)), {speaker});
  return body_head_.forward(SeqBatch::single(Mat(h.data.row(pos)))).data.row(0);
}

RowVec ArModel::hand_step(const Mat& window_input, int pos, int speaker, const RowVec& current_body_code) const {
  check_speakers({speaker});
  const Mat h = trunk_hand_.forward(SeqBatch::single(normalize_window(window_input)), {speaker}).data.row(pos);
  if (!cfg_.cross_conditional) return hand_head_.forward(SeqBatch::single(h)).data.row(0);
  Mat in(1, h.cols() + current_body_code.size());
  in << h, normalize_codes(current_body_code, 0);
  return hand_head_.forward(SeqBatch::single(in)).data.row(0);
}

Mat log_softmax_rows(const Mat& logits) {
  Mat out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double m = out.row(r).maxCoeff();
    const double lse = m + std::log((out.row(r).array() - m).exp().sum());
    out.row(r).array() -= lse;
  }
  return out;
}

Mat softmax_rows(const Mat& logits) { return log_softmax_rows(logits).array().exp(); }

ArModel::StepResult ArModel::train_step(const Batch& batch) {
  const int B = batch.body_codes.batch;
  const int tau = batch.body_codes.steps;
  require(B > 0 && tau > 0, "ar train_step: empty batch");
  require(batch.mfcc.batch == B && batch.hand_codes.batch == B && batch.hand_codes.steps == tau,
          "ar train_step: inconsistent batch shapes");
  require(static_cast<int>(batch.speakers.size()) == B, "ar train_step: one speaker per sequence required");
  const size_t n = static_cast<size_t>(B) * static_cast<size_t>(tau);
  require(batch.body.size() == n && batch.hand.size() == n, "ar train_step: target count mismatch");

  Cache cache;
  const SeqBatch audio = audio_.forward(batch.mfcc, cache.audio);
  require(audio.steps == tau, "ar train_step: audio encodes to " + std::to_string(audio.steps) +
                                  " tokens but codes have " + std::to_string(tau));
  Forward f = forward_tokens(audio, batch.body_codes, batch.hand_codes, batch.speakers, &cache);

  const Mat lb = log_softmax_rows(f.body_logits.data);
  const Mat lh = log_softmax_rows(f.hand_logits.data);
  double total = 0.0;
  Mat db = lb.array().exp();
  Mat dh = lh.array().exp();
  for (size_t r = 0; r < n; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    total += lb(ri, batch.body[r]) + lh(ri, batch.hand[r]);
    db(ri, batch.body[r]) -= 1.0;
    dh(ri, batch.hand[r]) -= 1.0;
  }
  db /= B;
  dh /= B;
  StepResult res{-total / B, 2.0 * static_cast<double>(n)};
  if (!std::isfinite(res.loss)) return res;

  const SeqBatch d_hand_in = hand_head_.backward(SeqBatch(std::move(dh), B, tau), cache.hand_head);
  const SeqBatch d_hb = body_head_.backward(SeqBatch(std::move(db), B, tau), cache.body_head);
  const Eigen::Index c = cfg_.channels;
  const Eigen::Index k = vq::kCodeDim;
  // The current body code enters the hand head as data, so its gradient stops there.
  const SeqBatch d_hh = cfg_.cross_conditional ? SeqBatch(d_hand_in.data.leftCols(c), B, tau) : d_hand_in;
  SeqBatch d_audio(B, tau, static_cast<int>(k));
  d_audio.data += trunk_hand_.backward(d_hh, cache.trunk_hand).data.rightCols(k);
  d_audio.data += trunk_body_.backward(d_hb, cache.trunk_body).data.rightCols(k);
  audio_.backward(d_audio, cache.audio);
  return res;
}

nn::ParamList ArModel::params() {
  nn::ParamList out;
  audio_.collect(out);
  trunk_body_.collect(out);
  trunk_hand_.collect(out);
  body_head_.collect(out);
  hand_head_.collect(out);
  return out;
}

nn::ParamList ArModel::buffers() {
  nn::ParamList out;
  audio_.collect_buffers(out);
  out.push_back(&code_norm_);
  return out;
}

double joint_log_prob(const ArModel& model, const IndexPairSequence& idx, const Mat& audio_tokens, int speaker,
                      const Mat& body_entries, const Mat& hand_entries) {
  validate(idx, static_cast<int>(body_entries.rows()), static_cast<int>(hand_entries.rows()));
  require(idx.steps() == audio_tokens.rows(), "joint_log_prob: index and audio lengths differ");
  const ArLogits l = model.logits(gather_rows(body_entries, idx.body), gather_rows(hand_entries, idx.hand),
                                  audio_tokens, speaker);
  const Mat lb = log_softmax_rows(l.body);
  const Mat lh = log_softmax_rows(l.hand);
  double total = 0.0;
  for (int t = 0; t < idx.steps(); ++t) total += lb(t, idx.body[static_cast<size_t>(t)]) + lh(t, idx.hand[static_cast<size_t>(t)]);
  return total;
}

double perplexity(const ArModel& model, const std::vector<ArExample>& set, const Mat& body_entries,
                  const Mat& hand_entries) {
  require(!set.empty(), "perplexity: empty set");
  double nll = 0.0, tokens = 0.0;
  for (const ArExample& ex : set) {
    nll -= joint_log_prob(model, ex.tokens, model.encode_audio(ex.mfcc), ex.speaker, body_entries, hand_entries);
    tokens += 2.0 * ex.tokens.steps();
  }
  return std::exp(nll / tokens);
}

namespace {

ArModel::Batch make_batch(const std::vector<ArExample>& set, const std::vector<size_t>& order, size_t begin,
                          size_t end, const Mat& body_entries, const Mat& hand_entries) {
  const int B = static_cast<int>(end - begin);
  const ArExample& first = set[order[begin]];
  const int frames = static_cast<int>(first.mfcc.rows());
  const int tau = first.tokens.steps();
  ArModel::Batch b;
  b.mfcc = SeqBatch(B, frames, static_cast<int>(first.mfcc.cols()));
  b.body_codes = SeqBatch(B, tau, vq::kCodeDim);
  b.hand_codes = SeqBatch(B, tau, vq::kCodeDim);
  for (size_t i = begin; i < end; ++i) {
    const ArExample& ex = set[order[i]];
    const int bi = static_cast<int>(i - begin);
    b.mfcc.sequence(bi) = ex.mfcc;
    b.body_codes.sequence(bi) = gather_rows(body_entries, ex.tokens.body);
    b.hand_codes.sequence(bi) = gather_rows(hand_entries, ex.tokens.hand);
    b.body.insert(b.body.end(), ex.tokens.body.begin(), ex.tokens.body.end());
    b.hand.insert(b.hand.end(), ex.tokens.hand.begin(), ex.tokens.hand.end());
    b.speakers.push_back(ex.speaker);
  }
  return b;
}

}  // namespace

ArTrainResult ar_train(ArModel model, const std::vector<ArExample>& train, const std::vector<ArExample>& val,
                       const Mat& body_entries, const Mat& hand_entries, const ArTrainHyper& hyper) {
  require(!train.empty(), "ar_train: no training windows");
  require(hyper.batch_size >= 1 && hyper.epochs >= 0, "ar_train: invalid batch size or epoch count");
  require(body_entries.rows() == model.config().body_codes && hand_entries.rows() == model.config().hand_codes,
          "ar_train: codebook sizes do not match the model");
  const Eigen::Index frames = train.front().mfcc.rows();
  for (const ArExample& ex : train) {
    require(ex.mfcc.rows() == frames && ex.tokens.steps() * 4 == frames,
            "ar_train: window '" + ex.id + "' does not match the common window shape");
    validate(ex.tokens, model.config().body_codes, model.config().hand_codes);
  }

  model.set_code_statistics(body_entries, hand_entries);
  nn::ParamList params = model.params();
  nn::Adam opt(params, {hyper.lr, hyper.beta1, hyper.beta2, 1e-8});
  Rng rng(derive_seed(hyper.seed, 0xa7));
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t bs = static_cast<size_t>(hyper.batch_size);

  ArTrainResult result;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_values = nn::flatten_values(params);
  nn::ParamList bufs = model.buffers();
  std::vector<double> best_buffers = nn::flatten_values(bufs);
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    double nll = 0.0, tokens = 0.0;
    int batch_no = 0;
    for (size_t begin = 0; begin < order.size(); begin += bs, ++batch_no) {
      const size_t end = std::min(order.size(), begin + bs);
      const ArModel::Batch batch = make_batch(train, order, begin, end, body_entries, hand_entries);
      opt.zero_grad();
      const ArModel::StepResult step = model.train_step(batch);
      if (!std::isfinite(step.loss)) {
        std::string ids;
        for (size_t i = begin; i < end && i < begin + 4; ++i) ids += (ids.empty() ? "" : ", ") + train[order[i]].id;
        throw NumericError("ar_train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no) + " (" + std::to_string(end - begin) + " windows, first: " +
                           ids + ")");
      }
      opt.step();
      nll += step.loss * static_cast<double>(end - begin);
      tokens += step.tokens;
    }
    ArEpochLog entry;
    entry.epoch = epoch;
    entry.train_perplexity = std::exp(nll / tokens);
    entry.val_perplexity = val.empty() ? entry.train_perplexity : perplexity(model, val, body_entries, hand_entries);
    result.log.push_back(entry);
    if (entry.val_perplexity < best) {
      best = entry.val_perplexity;
      best_values = nn::flatten_values(params);
      best_buffers = nn::flatten_values(bufs);
      result.best_epoch = epoch;
    }
  }
  nn::assign_values(params, best_values);
  nn::assign_values(bufs, best_buffers);
  result.model = std::move(model);
  return result;
}

// ---------------------------------------------------------------- sampling

namespace {

int draw(const RowVec& logits, const SampleOptions& opt, Rng& rng) {
  if (opt.greedy) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.size(); ++k) {
      if (logits(k) > logits(best)) best = k;
    }
    return static_cast<int>(best);
  }
  const Mat p = softmax_rows(logits / opt.temperature);
  return rng.categorical(std::span<const double>(p.data(), static_cast<size_t>(p.size())));
}

}  // namespace

IndexPairSequence ar_sample(const ArModel& model, const Mat& mfcc, int speaker, const Mat& body_entries,
                            const Mat& hand_entries, const SampleOptions& opt) {
  require(opt.greedy || opt.temperature > 0.0, "ar_sample: temperature must be positive");
  require(body_entries.rows() == model.config().body_codes && hand_entries.rows() == model.config().hand_codes,
          "ar_sample: codebook sizes do not match the model");
  require(mfcc.rows() >= 4 && mfcc.rows() % 4 == 0, "ar_sample: frame count must be a positive multiple of 4");
  const int tau = static_cast<int>(mfcc.rows() / 4);
  const Eigen::Index k = vq::kCodeDim;
  Rng rng(opt.seed);
  IndexPairSequence out;
  int cached_start = -1;
  Mat audio_tokens;
  for (int t = 0; t < tau; ++t) {
    const int s = std::max(0, t - (kContextTokens - 1));
    const int e = std::min(s + kContextTokens, tau);
    if (s != cached_start) {
      audio_tokens = model.encode_audio(mfcc.middleRows(4 * s, 4 * (e - s)));
      cached_start = s;
    }
    Mat window = Mat::Zero(e - s, 3 * k);
    window.rightCols(k) = audio_tokens;
    for (int p = s; p < t; ++p) {
      window.block(p - s, 0, 1, k) = body_entries.row(out.body[static_cast<size_t>(p)]);
      window.block(p - s, k, 1, k) = hand_entries.row(out.hand[static_cast<size_t>(p)]);
    }
    const int cb = draw(model.body_step(window, t - s, speaker), opt, rng);
    const int ch = draw(model.hand_step(window, t - s, speaker, body_entries.row(cb)), opt, rng);
    out.body.push_back(cb);
    out.hand.push_back(ch);
  }
  return out;
}

}  // namespace holo::ar
