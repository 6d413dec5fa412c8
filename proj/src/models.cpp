#include "holab/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "holab/error.hpp"
#include "holab/nn/optim.hpp"

namespace holab {

namespace {

constexpr int kInferenceChunk = 64;

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

// Context tensors: norm.min, norm.max (1 x F) and horizon (1 x 1).
void put_context(nn::Checkpoint& ckpt, const ModelContext& ctx) {
  const auto n = static_cast<Eigen::Index>(ctx.normalization.min.size());
  nn::Matrix lo(1, n), hi(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lo(0, i) = ctx.normalization.min[i];
    hi(0, i) = ctx.normalization.max[i];
  }
  ckpt.tensors.push_back({"norm.min", lo});
  ckpt.tensors.push_back({"norm.max", hi});
  ckpt.tensors.push_back({"horizon", nn::Matrix::Constant(1, 1, ctx.horizon)});
}

ModelContext get_context(const nn::Checkpoint& ckpt) {
  ModelContext ctx;
  const nn::Matrix& lo = ckpt.get("norm.min");
  const nn::Matrix& hi = ckpt.get("norm.max");
  if (lo.size() != hi.size()) throw DataError("checkpoint normalization tensors disagree");
  ctx.normalization.min.assign(lo.data(), lo.data() + lo.size());
  ctx.normalization.max.assign(hi.data(), hi.data() + hi.size());
  ctx.horizon = ckpt.get("horizon")(0, 0);
  if (!(ctx.horizon > 0)) throw DataError("checkpoint horizon must be positive");
  return ctx;
}

void put_stack(nn::Checkpoint& ckpt, const std::string& prefix, const nn::LstmStack& s) {
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const std::string p = prefix + std::to_string(l);
    ckpt.tensors.push_back({p + ".W", s.layers[l].W});
    ckpt.tensors.push_back({p + ".U", s.layers[l].U});
    ckpt.tensors.push_back({p + ".b", s.layers[l].b});
  }
}

nn::LstmStack get_stack(const nn::Checkpoint& ckpt, const std::string& prefix) {
  nn::LstmStack s;
  for (int l = 0;; ++l) {
    const std::string p = prefix + std::to_string(l);
    const bool present = std::any_of(ckpt.tensors.begin(), ckpt.tensors.end(),
                                     [&](const nn::NamedTensor& t) { return t.name == p + ".W"; });
    if (!present) break;
    nn::LstmLayerParams layer;
    layer.W = ckpt.get(p + ".W");
    layer.U = ckpt.get(p + ".U");
    layer.b = ckpt.get(p + ".b");
    layer.hidden_dim = static_cast<int>(layer.U.cols());
    layer.input_dim = static_cast<int>(layer.W.cols());
    if (layer.W.rows() != 4 * layer.hidden_dim || layer.U.rows() != 4 * layer.hidden_dim ||
        layer.b.rows() != 4 * layer.hidden_dim || layer.b.cols() != 1) {
      throw DataError("checkpoint LSTM layer " + p + " has inconsistent shapes");
    }
    if (!s.layers.empty() && s.layers.back().hidden_dim != layer.input_dim) {
      throw DataError("checkpoint LSTM layer " + p + " does not chain with the previous layer");
    }
    s.layers.push_back(std::move(layer));
  }
  if (s.layers.empty()) throw DataError("checkpoint has no '" + prefix + "' LSTM layers");
  return s;
}

void put_dense(nn::Checkpoint& ckpt, const std::string& name, const nn::DenseParams& d) {
  ckpt.tensors.push_back({name + ".W", d.W});
  ckpt.tensors.push_back({name + ".b", d.b});
}

nn::DenseParams get_dense(const nn::Checkpoint& ckpt, const std::string& name, nn::Activation act) {
  nn::DenseParams d{ckpt.get(name + ".W"), ckpt.get(name + ".b"), act};
  if (d.b.rows() != d.W.rows() || d.b.cols() != 1) throw DataError("checkpoint dense layer " + name + " is inconsistent");
  return d;
}

void require_kind(const nn::Checkpoint& ckpt, const std::string& kind) {
  if (ckpt.architecture.rfind(kind + " ", 0) != 0) {
    throw DataError("checkpoint holds '" + ckpt.architecture.substr(0, ckpt.architecture.find(' ')) +
                    "', expected " + kind);
  }
}

void append_stack(std::vector<nn::Matrix*>& out, nn::LstmStack& s) {
  for (auto& l : s.layers) {
    out.push_back(&l.W);
    out.push_back(&l.U);
    out.push_back(&l.b);
  }
}

std::vector<const nn::Matrix*> const_params(std::vector<nn::Matrix*> v) { return {v.begin(), v.end()}; }

}  // namespace

// ---------------------------------------------------------------- LSTM regressor

LstmRegressor LstmRegressor::create(const std::vector<int>& hidden, std::uint64_t seed, int input_dim) {
  Rng rng(seed, 0x157);
  LstmRegressor m;
  m.lstm = nn::LstmStack::init(input_dim, hidden, rng);
  m.head = nn::DenseParams::init(hidden.back(), 1, nn::Activation::Identity, rng);
  return m;
}

LstmRegressor LstmRegressor::zeros_like() const {
  LstmRegressor g;
  g.lstm = lstm.zeros_like();
  g.head = head.zeros_like();
  g.context = context;
  return g;
}

std::vector<nn::Matrix*> LstmRegressor::parameters() {
  std::vector<nn::Matrix*> out;
  append_stack(out, lstm);
  out.push_back(&head.W);
  out.push_back(&head.b);
  return out;
}

std::size_t LstmRegressor::parameter_count() const { return lstm.parameter_count() + head.W.size() + head.b.size(); }

Eigen::RowVectorXd LstmRegressor::forward(const nn::Matrix& x, int steps, int batch) const {
  const nn::Matrix h = nn::lstm_stack_forward(lstm, x, steps, batch);
  return nn::dense_forward(head, nn::last_step(h, steps, batch));
}

double LstmRegressor::loss_and_gradients(const nn::Matrix& x, int steps, int batch, const Eigen::RowVectorXd& target,
                                         LstmRegressor& grad) const {
  nn::LstmStackCache cache;
  const nn::Matrix h = nn::lstm_stack_forward(lstm, x, steps, batch, &cache);
  nn::DenseCache head_cache;
  const nn::Matrix pred = nn::dense_forward(head, nn::last_step(h, steps, batch), &head_cache);
  const double loss = nn::mse(pred, target);
  const nn::Matrix dlast = nn::dense_backward(head, head_cache, nn::mse_gradient(pred, target), grad.head);
  nn::Matrix dh = nn::Matrix::Zero(h.rows(), h.cols());
  dh.rightCols(batch) = dlast;
  nn::lstm_stack_backward(lstm, cache, dh, grad.lstm);
  return loss;
}

std::string LstmRegressor::architecture() const {
  return "lstm_regressor in=" + std::to_string(lstm.input_dim()) + " hidden=" + join(lstm.hidden_sizes()) +
         " norm=" + hex(context.normalization.fingerprint());
}

nn::Checkpoint LstmRegressor::to_checkpoint() const {
  nn::Checkpoint ckpt{architecture(), {}};
  put_stack(ckpt, "lstm", lstm);
  put_dense(ckpt, "head", head);
  put_context(ckpt, context);
  return ckpt;
}

LstmRegressor LstmRegressor::from_checkpoint(const nn::Checkpoint& ckpt) {
  require_kind(ckpt, "lstm_regressor");
  LstmRegressor m;
  m.lstm = get_stack(ckpt, "lstm");
  m.head = get_dense(ckpt, "head", nn::Activation::Identity);
  m.context = get_context(ckpt);
  if (m.head.in_dim() != m.lstm.output_dim() || m.head.out_dim() != 1) throw DataError("checkpoint head shape mismatch");
  return m;
}

// ---------------------------------------------------------------- autoencoder

SeqAutoencoder SeqAutoencoder::create(int codeword, std::uint64_t seed, const std::vector<int>& encoder_hidden,
                                      const std::vector<int>& decoder_hidden, int input_dim) {
  if (codeword < 1) throw UsageError("codeword length must be >= 1");
  Rng rng(seed, 0xae);
  SeqAutoencoder ae;
  std::vector<int> enc = encoder_hidden;
  enc.push_back(codeword);
  const std::vector<int> dec = decoder_hidden.empty() ? std::vector<int>{codeword} : decoder_hidden;
  ae.encoder = nn::LstmStack::init(input_dim, enc, rng);
  ae.decoder = nn::LstmStack::init(codeword, dec, rng);
  ae.output = nn::DenseParams::init(dec.back(), input_dim, nn::Activation::Identity, rng);
  return ae;
}

SeqAutoencoder SeqAutoencoder::zeros_like() const {
  SeqAutoencoder g;
  g.encoder = encoder.zeros_like();
  g.decoder = decoder.zeros_like();
  g.output = output.zeros_like();
  g.context = context;
  return g;
}

std::vector<nn::Matrix*> SeqAutoencoder::parameters() {
  std::vector<nn::Matrix*> out;
  append_stack(out, encoder);
  append_stack(out, decoder);
  out.push_back(&output.W);
  out.push_back(&output.b);
  return out;
}

std::size_t SeqAutoencoder::parameter_count() const {
  return encoder.parameter_count() + decoder.parameter_count() + output.W.size() + output.b.size();
}

nn::Matrix SeqAutoencoder::encode(const nn::Matrix& x, int steps, int batch) const {
  const nn::Matrix h = nn::lstm_stack_forward(encoder, x, steps, batch);
  return nn::last_step(h, steps, batch);
}

nn::Matrix SeqAutoencoder::reconstruct(const nn::Matrix& x, int steps, int batch) const {
  const nn::Matrix cw = encode(x, steps, batch);
  const nn::Matrix hd = nn::lstm_stack_forward(decoder, cw, steps, batch, nullptr, true);
  return nn::dense_forward(output, hd);
}

double SeqAutoencoder::loss_and_gradients(const nn::Matrix& x, int steps, int batch, SeqAutoencoder& grad) const {
  nn::LstmStackCache enc_cache, dec_cache;
  nn::DenseCache out_cache;
  const nn::Matrix he = nn::lstm_stack_forward(encoder, x, steps, batch, &enc_cache);
  const nn::Matrix cw = nn::last_step(he, steps, batch);
  const nn::Matrix hd = nn::lstm_stack_forward(decoder, cw, steps, batch, &dec_cache, true);
  const nn::Matrix recon = nn::dense_forward(output, hd, &out_cache);
  const double loss = nn::mse(recon, x);

  const nn::Matrix dhd = nn::dense_backward(output, out_cache, nn::mse_gradient(recon, x), grad.output);
  const nn::Matrix dcw = nn::lstm_stack_backward(decoder, dec_cache, dhd, grad.decoder);
  nn::Matrix dhe = nn::Matrix::Zero(he.rows(), he.cols());
  dhe.rightCols(batch) = dcw;
  nn::lstm_stack_backward(encoder, enc_cache, dhe, grad.encoder);
  return loss;
}

std::string SeqAutoencoder::architecture() const {
  return "seq_autoencoder in=" + std::to_string(input_dim()) + " encoder=" + join(encoder.hidden_sizes()) +
         " decoder=" + join(decoder.hidden_sizes()) + " cw=" + std::to_string(codeword_length()) +
         " norm=" + hex(context.normalization.fingerprint());
}

nn::Checkpoint SeqAutoencoder::to_checkpoint() const {
  nn::Checkpoint ckpt{architecture(), {}};
  put_stack(ckpt, "encoder", encoder);
  put_stack(ckpt, "decoder", decoder);
  put_dense(ckpt, "output", output);
  put_context(ckpt, context);
  return ckpt;
}

SeqAutoencoder SeqAutoencoder::from_checkpoint(const nn::Checkpoint& ckpt) {
  require_kind(ckpt, "seq_autoencoder");
  SeqAutoencoder ae;
  ae.encoder = get_stack(ckpt, "encoder");
  ae.decoder = get_stack(ckpt, "decoder");
  ae.output = get_dense(ckpt, "output", nn::Activation::Identity);
  ae.context = get_context(ckpt);
  if (ae.decoder.input_dim() != ae.codeword_length() || ae.output.in_dim() != ae.decoder.output_dim() ||
      ae.output.out_dim() != ae.input_dim()) {
    throw DataError("checkpoint autoencoder shapes do not chain");
  }
  return ae;
}

// ---------------------------------------------------------------- MLP

MlpRegressor MlpRegressor::create(int input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  Rng rng(seed, 0x31f);
  MlpRegressor m;
  int in = input_dim;
  for (int h : hidden) {
    m.layers.push_back(nn::DenseParams::init(in, h, nn::Activation::Relu, rng));
    in = h;
  }
  m.layers.push_back(nn::DenseParams::init(in, 1, nn::Activation::Identity, rng));
  return m;
}

MlpRegressor MlpRegressor::zeros_like() const {
  MlpRegressor g;
  for (const auto& l : layers) g.layers.push_back(l.zeros_like());
  g.context = context;
  g.encoder_fingerprint = encoder_fingerprint;
  return g;
}

std::vector<nn::Matrix*> MlpRegressor::parameters() {
  std::vector<nn::Matrix*> out;
  for (auto& l : layers) {
    out.push_back(&l.W);
    out.push_back(&l.b);
  }
  return out;
}

std::size_t MlpRegressor::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.W.size() + l.b.size();
  return n;
}

std::vector<int> MlpRegressor::hidden_sizes() const {
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) out.push_back(layers[i].out_dim());
  return out;
}

Eigen::RowVectorXd MlpRegressor::forward(const nn::Matrix& codewords) const {
  nn::Matrix a = codewords;
  for (const auto& l : layers) a = nn::dense_forward(l, a);
  return a;
}

double MlpRegressor::loss_and_gradients(const nn::Matrix& codewords, const Eigen::RowVectorXd& target,
                                        MlpRegressor& grad) const {
  std::vector<nn::DenseCache> caches(layers.size());
  nn::Matrix a = codewords;
  for (std::size_t i = 0; i < layers.size(); ++i) a = nn::dense_forward(layers[i], a, &caches[i]);
  const double loss = nn::mse(a, target);
  nn::Matrix d = nn::mse_gradient(a, target);
  for (std::size_t i = layers.size(); i-- > 0;) d = nn::dense_backward(layers[i], caches[i], d, grad.layers[i]);
  return loss;
}

std::string MlpRegressor::architecture() const {
  return "mlp_regressor in=" + std::to_string(input_dim()) + " hidden=" + join(hidden_sizes()) +
         " encoder=" + hex(encoder_fingerprint) + " norm=" + hex(context.normalization.fingerprint());
}

nn::Checkpoint MlpRegressor::to_checkpoint() const {
  nn::Checkpoint ckpt{architecture(), {}};
  for (std::size_t i = 0; i < layers.size(); ++i) put_dense(ckpt, "dense" + std::to_string(i), layers[i]);
  // Fingerprint split into two exactly representable 32-bit halves.
  nn::Matrix fp(1, 2);
  fp(0, 0) = static_cast<double>(encoder_fingerprint >> 32);
  fp(0, 1) = static_cast<double>(encoder_fingerprint & 0xffffffffULL);
  ckpt.tensors.push_back({"encoder.fingerprint", fp});
  put_context(ckpt, context);
  return ckpt;
}

MlpRegressor MlpRegressor::from_checkpoint(const nn::Checkpoint& ckpt) {
  require_kind(ckpt, "mlp_regressor");
  MlpRegressor m;
  for (int i = 0;; ++i) {
    const std::string name = "dense" + std::to_string(i);
    const bool present = std::any_of(ckpt.tensors.begin(), ckpt.tensors.end(),
                                     [&](const nn::NamedTensor& t) { return t.name == name + ".W"; });
    if (!present) break;
    m.layers.push_back(get_dense(ckpt, name, nn::Activation::Relu));
  }
  if (m.layers.empty()) throw DataError("checkpoint has no MLP layers");
  m.layers.back().activation = nn::Activation::Identity;
  for (std::size_t i = 1; i < m.layers.size(); ++i) {
    if (m.layers[i].in_dim() != m.layers[i - 1].out_dim()) throw DataError("checkpoint MLP layers do not chain");
  }
  if (m.layers.back().out_dim() != 1) throw DataError("checkpoint MLP output must be scalar");
  const nn::Matrix& fp = ckpt.get("encoder.fingerprint");
  m.encoder_fingerprint = (static_cast<std::uint64_t>(fp(0, 0)) << 32) | static_cast<std::uint64_t>(fp(0, 1));
  m.context = get_context(ckpt);
  return m;
}

// ---------------------------------------------------------------- helpers

std::uint64_t parameter_checksum(const std::vector<const nn::Matrix*>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const nn::Matrix* m : params) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(m->data()[i]);
      h = (h ^ bits) * 0x100000001b3ULL;
      h ^= h >> 29;
    }
  }
  return h;
}

std::uint64_t encoder_checksum(const SeqAutoencoder& ae) {
  auto copy = ae;
  std::vector<nn::Matrix*> enc;
  append_stack(enc, copy.encoder);
  return parameter_checksum(const_params(enc));
}

void require_normalized(const SequenceMatrix& features) {
  constexpr double slack = 1e-9;
  if (features.size() == 0) throw DataError("empty input sequence");
  const double lo = features.minCoeff();
  const double hi = features.maxCoeff();
  if (!(lo >= kNormalizedLow - slack) || !(hi <= kNormalizedHigh + slack)) {
    throw DataError("input sequence is not normalized (values outside [-0.5, 1.5])");
  }
}

double predict_download_time(double raw_output, double horizon) {
  const double t = raw_output * horizon;
  if (!(t > 0.0)) return std::numeric_limits<double>::denorm_min();
  return std::min(t, horizon);
}

namespace {

template <class Fn>
void for_chunks(const std::vector<const SequenceMatrix*>& seqs, Fn&& fn) {
  for (std::size_t start = 0; start < seqs.size(); start += kInferenceChunk) {
    const std::size_t end = std::min(seqs.size(), start + kInferenceChunk);
    std::vector<const nn::Tensor2D*> chunk(seqs.begin() + start, seqs.begin() + end);
    for (const auto* s : chunk) require_normalized(*s);
    fn(start, chunk);
  }
}

}  // namespace

std::vector<double> predict_download_times(const LstmRegressor& model, const std::vector<const SequenceMatrix*>& seqs) {
  std::vector<double> out(seqs.size());
  for_chunks(seqs, [&](std::size_t start, const std::vector<const nn::Tensor2D*>& chunk) {
    const int steps = static_cast<int>(chunk.front()->rows());
    const int batch = static_cast<int>(chunk.size());
    const Eigen::RowVectorXd raw = model.forward(nn::pack_sequences(chunk), steps, batch);
    for (int b = 0; b < batch; ++b) out[start + b] = predict_download_time(raw(b), model.context.horizon);
  });
  return out;
}

nn::Matrix encode_all(const SeqAutoencoder& ae, const std::vector<const SequenceMatrix*>& seqs) {
  nn::Matrix out(ae.codeword_length(), static_cast<Eigen::Index>(seqs.size()));
  for_chunks(seqs, [&](std::size_t start, const std::vector<const nn::Tensor2D*>& chunk) {
    const int steps = static_cast<int>(chunk.front()->rows());
    const int batch = static_cast<int>(chunk.size());
    out.middleCols(static_cast<Eigen::Index>(start), batch) = ae.encode(nn::pack_sequences(chunk), steps, batch);
  });
  return out;
}

std::vector<double> predict_download_times(const SeqAutoencoder& ae, const MlpRegressor& mlp,
                                           const std::vector<const SequenceMatrix*>& seqs) {
  if (mlp.input_dim() != ae.codeword_length()) throw DataError("MLP input does not match the codeword length");
  const Eigen::RowVectorXd raw = mlp.forward(encode_all(ae, seqs));
  std::vector<double> out(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) out[i] = predict_download_time(raw(i), mlp.context.horizon);
  return out;
}

}  // namespace holab
