#include "holo/vq/vqvae.hpp"

#include <algorithm>
#include <cmath>

#include "holo/nn/optim.hpp"

namespace holo::vq {

VqLoss vq_loss(const Mat& m, const Mat& m_hat, const Mat& latents, const Mat& codes, double beta) {
  require(m.rows() == m_hat.rows() && m.cols() == m_hat.cols(), "vq_loss: motion and reconstruction shapes differ");
  require(latents.rows() == codes.rows() && latents.cols() == codes.cols(),
          "vq_loss: latent and code shapes differ");
  require(m.size() > 0 && latents.size() > 0, "vq_loss: empty input");
  VqLoss out;
  const double nm = static_cast<double>(m.size());
  const double nz = static_cast<double>(latents.size());
  const Mat recon_diff = m_hat - m;
  const Mat code_diff = codes - latents;
  out.recon = recon_diff.squaredNorm() / nm;
  out.codebook = code_diff.squaredNorm() / nz;
  out.commitment = beta * code_diff.squaredNorm() / nz;
  out.total = out.recon + out.codebook + out.commitment;
  out.d_recon = (2.0 / nm) * recon_diff;
  out.d_codes = (2.0 / nz) * code_diff;
  out.d_latents = (-2.0 * beta / nz) * code_diff;
  return out;
}

VqVae::VqVae(const VqVaeConfig& cfg) : cfg_(cfg) {
  require(cfg.codebook_size >= 1, "codebook size must be positive");
  require(cfg.hidden >= 1, "hidden channels must be positive");
  Rng rng(cfg.seed);
  const std::string p = motion::to_string(cfg.part);
  nn::TemporalCodecConfig codec{motion::part_dim(cfg.part), cfg.hidden, kCodeDim};
  encoder_ = nn::TemporalEncoder("vq." + p + ".enc", codec, rng);
  decoder_ = nn::TemporalDecoder("vq." + p + ".dec", codec, rng);
  if (cfg.zero_final_layer) decoder_.zero_output_layer();
  Codebook cb = init_codebook(cfg.codebook_size, cfg.part, rng);
  codebook_ = nn::Param("vq." + p + ".codebook", cb.entries);
}

int VqVae::io_dim() const { return motion::part_dim(cfg_.part); }

Mat VqVae::encode(const Mat& motion) const {
  require(motion.cols() == io_dim(), "encode: expected " + std::to_string(io_dim()) + " channels for part '" +
                                         motion::to_string(cfg_.part) + "', got " + std::to_string(motion.cols()));
  require(motion.rows() % kWindowFactor == 0 && motion.rows() > 0,
          "encode: frame count " + std::to_string(motion.rows()) +
              " is not a positive multiple of 4; truncate the sequence first");
  return encoder_.forward(SeqBatch::single(motion)).data;
}

QuantizedSequence VqVae::quantize(const Mat& latents) const { return vq::quantize(latents, codebook()); }

Mat VqVae::decode(const QuantizedSequence& q) const {
  require(q.part == cfg_.part, "decode: codes for part '" + motion::to_string(q.part) + "' given to the '" +
                                   motion::to_string(cfg_.part) + "' decoder");
  require(q.codes.rows() == q.steps() && q.codes.cols() == kCodeDim, "decode: malformed quantized sequence");
  require(q.steps() > 0, "decode: empty quantized sequence");
  return decoder_.forward(SeqBatch::single(q.codes)).data;
}

Mat VqVae::reconstruct(const Mat& motion) const { return decode(quantize(encode(motion))); }

std::vector<int> VqVae::tokenize(const Mat& motion) const { return nearest_indices(encode(motion), codebook_.value); }

Codebook VqVae::codebook() const { return Codebook{codebook_.value, cfg_.part}; }

nn::ParamList VqVae::params() {
  nn::ParamList out;
  encoder_.collect(out);
  decoder_.collect(out);
  out.push_back(&codebook_);
  return out;
}

nn::ParamList VqVae::buffers() {
  nn::ParamList out;
  encoder_.collect_buffers(out);
  decoder_.collect_buffers(out);
  return out;
}

VqVae::StepResult VqVae::train_step(const SeqBatch& motion, double beta) {
  require(motion.channels() == io_dim(), "train_step: channel mismatch");
  nn::TemporalEncoder::Cache enc_cache;
  nn::TemporalDecoder::Cache dec_cache;
  const SeqBatch latents = encoder_.forward(motion, enc_cache);
  StepResult out;
  out.indices = nearest_indices(latents.data, codebook_.value);
  SeqBatch codes(latents.batch, latents.steps, kCodeDim);
  for (size_t r = 0; r < out.indices.size(); ++r) {
    codes.data.row(static_cast<Eigen::Index>(r)) = codebook_.value.row(out.indices[r]);
  }
  const SeqBatch m_hat = decoder_.forward(codes, dec_cache);
  out.loss = vq_loss(motion.data, m_hat.data, latents.data, codes.data, beta);

  // Straight-through: the decoder-input gradient goes to E unchanged.
  SeqBatch d_input = decoder_.backward(SeqBatch(out.loss.d_recon, m_hat.batch, m_hat.steps), dec_cache);
  d_input.data += out.loss.d_latents;
  encoder_.backward(d_input, enc_cache);
  for (size_t r = 0; r < out.indices.size(); ++r) {
    codebook_.grad.row(out.indices[r]) += out.loss.d_codes.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

namespace {

SeqBatch stack(const std::vector<Mat>& windows, const std::vector<size_t>& order, size_t begin, size_t end) {
  const int len = static_cast<int>(windows[order[begin]].rows());
  const int dim = static_cast<int>(windows[order[begin]].cols());
  SeqBatch b(static_cast<int>(end - begin), len, dim);
  for (size_t i = begin; i < end; ++i) b.sequence(static_cast<int>(i - begin)) = windows[order[i]];
  return b;
}

}  // namespace

VqTrainResult train_vqvae(VqVae model, const std::vector<Mat>& windows, const VqTrainHyper& hyper,
                          const std::vector<Mat>& monitor) {
  require(!windows.empty(), "train_vqvae: no training windows");
  require(hyper.batch_size >= 1 && hyper.epochs >= 0, "train_vqvae: invalid batch size or epoch count");
  const Eigen::Index len = windows.front().rows();
  for (const Mat& w : windows) {
    require(w.rows() == len && w.cols() == model.io_dim(), "train_vqvae: windows must share shape " +
                                                               std::to_string(len) + " x " +
                                                               std::to_string(model.io_dim()));
  }
  require(len % kWindowFactor == 0, "train_vqvae: window length must be a multiple of 4");

  nn::ParamList params = model.params();
  nn::Adam opt(params, {hyper.lr, hyper.beta1, hyper.beta2, 1e-8});
  Rng rng(derive_seed(hyper.seed, 0x5a));
  std::vector<size_t> order(windows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::vector<Mat>& mon = monitor.empty() ? windows : monitor;
  const size_t bs = static_cast<size_t>(hyper.batch_size);

  VqTrainResult result;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    std::vector<long> usage(static_cast<size_t>(model.config().codebook_size), 0);
    double loss_sum = 0.0, recon_sum = 0.0;
    long tokens = 0;
    int batches = 0;
    for (size_t begin = 0; begin < order.size(); begin += bs) {
      const size_t end = std::min(order.size(), begin + bs);
      const SeqBatch batch = stack(windows, order, begin, end);
      opt.zero_grad();
      const VqVae::StepResult step = model.train_step(batch, hyper.beta);
      if (!std::isfinite(step.loss.total)) {
        throw NumericError("train_vqvae: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      opt.step();
      loss_sum += step.loss.total;
      recon_sum += step.loss.recon;
      ++batches;
      for (int k : step.indices) ++usage[static_cast<size_t>(k)];
      tokens += static_cast<long>(step.indices.size());
    }
    VqEpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / batches;
    entry.train_re = recon_sum / batches;
    entry.re = reconstruction_error(model, mon);
    const long top = *std::max_element(usage.begin(), usage.end());
    entry.top_usage = static_cast<double>(top) / static_cast<double>(tokens);
    entry.used_entries = static_cast<int>(std::count_if(usage.begin(), usage.end(), [](long c) { return c > 0; }));
    entry.collapse = entry.top_usage > 0.9;
    if (entry.collapse) {
      result.warnings.push_back("codebook collapse (" + motion::to_string(model.config().part) + "): epoch " +
                                std::to_string(epoch) + " maps " +
                                std::to_string(static_cast<int>(std::round(100 * entry.top_usage))) +
                                "% of tokens to one entry");
    }
    result.log.push_back(entry);
  }
  result.model = std::move(model);
  return result;
}

double reconstruction_error(const std::vector<Mat>& pred, const std::vector<Mat>& gt) {
  require(!gt.empty(), "reconstruction_error: empty set");
  require(pred.size() == gt.size(), "reconstruction_error: prediction and ground-truth counts differ");
  double sum = 0.0, count = 0.0;
  for (size_t i = 0; i < gt.size(); ++i) {
    require(pred[i].rows() == gt[i].rows() && pred[i].cols() == gt[i].cols(),
            "reconstruction_error: shape mismatch at item " + std::to_string(i));
    sum += (pred[i] - gt[i]).squaredNorm();
    count += static_cast<double>(gt[i].size());
  }
  return sum / count;
}

double reconstruction_error(const VqVae& model, const std::vector<Mat>& windows) {
  require(!windows.empty(), "reconstruction_error: empty set");
  std::vector<Mat> pred;
  pred.reserve(windows.size());
  for (const Mat& w : windows) pred.push_back(model.reconstruct(w));
  return reconstruction_error(pred, windows);
}

double compositional_reconstruction_error(const VqVae& body, const VqVae& hand, const std::vector<Mat>& body_windows,
                                          const std::vector<Mat>& hand_windows) {
  require(body_windows.size() == hand_windows.size(), "compositional RE: body and hand window counts differ");
  const double nb = static_cast<double>(motion::kBodyDim);
  const double nh = static_cast<double>(motion::kHandDim);
  return (nb * reconstruction_error(body, body_windows) + nh * reconstruction_error(hand, hand_windows)) / (nb + nh);
}

Mat window_part(const motion::Window& w, motion::Part part) {
  switch (part) {
    case motion::Part::kBody:
      return w.body;
    case motion::Part::kHand:
      return w.hand;
    case motion::Part::kJoint: {
      Mat j(w.body.rows(), motion::kBodyHandDim);
      j << w.body, w.hand;
      return j;
    }
  }
  throw ValidationError("unknown part");
}

std::vector<Mat> window_parts(const std::vector<motion::Window>& ws, motion::Part part) {
  std::vector<Mat> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(window_part(w, part));
  return out;
}

}  // namespace holo::vq
