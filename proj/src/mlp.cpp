#include "vtoldock/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vtoldock/errors.hpp"
#include "vtoldock/io.hpp"
#include "vtoldock/rng.hpp"

namespace vtoldock::nn {

const char* to_string(HeadType head) {
  switch (head) {
    case HeadType::linear: return "linear";
    case HeadType::softmax: return "softmax";
    case HeadType::dueling: return "dueling";
    case HeadType::gaussian: return "gaussian";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Gradients

double Gradients::squared_norm() const {
  double s = log_std.squaredNorm();
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

double Gradients::norm() const { return std::sqrt(squared_norm()); }

void Gradients::scale(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
  log_std *= factor;
}

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  log_std += other.log_std;
}

bool Gradients::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return log_std.allFinite();
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<int> sizes, HeadSpec head, std::uint64_t seed)
    : sizes_(std::move(sizes)), head_(head) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("Mlp layer sizes must be positive");
  if (head_.type == HeadType::gaussian && !(head_.action_high > head_.action_low))
    throw std::invalid_argument("gaussian head needs action_high > action_low");

  Rng rng(seed);
  auto make_layer = [&rng](int in, int out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.weight(r, c) = dist(rng);
    for (int r = 0; r < out; ++r) l.bias(r) = dist(rng);
    return l;
  };

  for (std::size_t i = 0; i + 2 < sizes_.size(); ++i)
    layers_.push_back(make_layer(sizes_[i], sizes_[i + 1]));
  const int feat = sizes_[sizes_.size() - 2];
  if (head_.type == HeadType::dueling) {
    layers_.push_back(make_layer(feat, 1));             // value stream
    layers_.push_back(make_layer(feat, sizes_.back()));  // advantage stream
  } else {
    layers_.push_back(make_layer(feat, sizes_.back()));
  }
  log_std_ = head_.type == HeadType::gaussian
                 ? Eigen::VectorXd::Constant(sizes_.back(), head_.init_log_std)
                 : Eigen::VectorXd(0);
  input_scale_ = Eigen::VectorXd::Ones(sizes_.front());
}

int Mlp::output_dim() const {
  return head_.type == HeadType::gaussian ? 2 * sizes_.back() : sizes_.back();
}

void Mlp::set_input_scale(const Eigen::VectorXd& scale) {
  if (scale.size() != input_dim()) throw std::invalid_argument("input scale dimension mismatch");
  input_scale_ = scale;
}

Eigen::VectorXd Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    std::ostringstream msg;
    msg << "forward: expected input of size " << input_dim() << ", got " << x.size();
    throw std::invalid_argument(msg.str());
  }
  Eigen::Map<const Eigen::MatrixXd> col(x.data(), input_dim(), 1);
  return run(col, nullptr).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim())
    throw std::invalid_argument("forward_batch: input row count mismatch");
  return run(inputs, nullptr);
}

Eigen::MatrixXd Mlp::run(const Eigen::MatrixXd& inputs, Cache* cache) const {
  Eigen::MatrixXd h = input_scale_.asDiagonal() * inputs;
  if (cache) cache->activations.push_back(h);
  for (std::size_t i = 0; i < hidden_count(); ++i) {
    const auto& l = layers_[i];
    h = ((l.weight * h).colwise() + l.bias).array().tanh().matrix();
    if (cache) cache->activations.push_back(h);
  }

  const std::size_t hc = hidden_count();
  switch (head_.type) {
    case HeadType::linear: {
      const auto& l = layers_[hc];
      return (l.weight * h).colwise() + l.bias;
    }
    case HeadType::softmax: {
      const auto& l = layers_[hc];
      Eigen::MatrixXd z = (l.weight * h).colwise() + l.bias;
      if (cache) cache->head_pre = z;
      Eigen::RowVectorXd zmax = z.colwise().maxCoeff();
      Eigen::MatrixXd e = (z.rowwise() - zmax).array().exp().matrix();
      Eigen::RowVectorXd sum = e.colwise().sum();
      return e.array().rowwise() / sum.array();
    }
    case HeadType::dueling: {
      const auto& vl = layers_[hc];
      const auto& al = layers_[hc + 1];
      Eigen::MatrixXd v = (vl.weight * h).colwise() + vl.bias;
      Eigen::MatrixXd a = (al.weight * h).colwise() + al.bias;
      Eigen::RowVectorXd amean = a.colwise().mean();
      if (cache) {
        cache->value = v;
        cache->advantage = a;
      }
      Eigen::MatrixXd q = a.rowwise() - amean;
      q.rowwise() += v.row(0);
      return q;
    }
    case HeadType::gaussian: {
      const auto& l = layers_[hc];
      Eigen::MatrixXd pre = (l.weight * h).colwise() + l.bias;
      if (cache) cache->head_pre = pre;
      const double half_span = 0.5 * (head_.action_high - head_.action_low);
      const int d = action_dim();
      Eigen::MatrixXd out(2 * d, inputs.cols());
      out.topRows(d) = ((pre.array().tanh() + 1.0) * half_span + head_.action_low).matrix();
      out.bottomRows(d) = log_std_.replicate(1, inputs.cols());
      return out;
    }
  }
  throw std::logic_error("unknown head type");
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_)
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  g.log_std = Eigen::VectorXd::Zero(log_std_.size());
  return g;
}

Gradients Mlp::backward(const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& upstream) const {
  if (inputs.rows() != input_dim() || upstream.rows() != output_dim() ||
      upstream.cols() != inputs.cols())
    throw std::invalid_argument("backward: shape mismatch");
  if (!upstream.allFinite()) throw NumericalFault("backward: non-finite upstream gradient");

  Cache cache;
  const Eigen::MatrixXd out = run(inputs, &cache);
  Gradients g = zero_gradients();
  const std::size_t hc = hidden_count();
  const Eigen::MatrixXd& feat = cache.activations.back();

  // Gradient with respect to the last hidden features.
  Eigen::MatrixXd dh;
  auto affine = [&](std::size_t idx, const Eigen::MatrixXd& dz) {
    g.layers[idx].weight = dz * feat.transpose();
    g.layers[idx].bias = dz.rowwise().sum();
    return Eigen::MatrixXd(layers_[idx].weight.transpose() * dz);
  };

  switch (head_.type) {
    case HeadType::linear:
      dh = affine(hc, upstream);
      break;
    case HeadType::softmax: {
      // dz = p * (g - <p, g>)
      Eigen::RowVectorXd pg = (out.array() * upstream.array()).colwise().sum();
      Eigen::MatrixXd dz = (out.array() * (upstream.rowwise() - pg).array()).matrix();
      dh = affine(hc, dz);
      break;
    }
    case HeadType::dueling: {
      Eigen::MatrixXd dv = upstream.colwise().sum();
      Eigen::MatrixXd da = upstream.rowwise() - upstream.colwise().mean();
      dh = affine(hc, dv);
      dh += affine(hc + 1, da);
      break;
    }
    case HeadType::gaussian: {
      const int d = action_dim();
      const double half_span = 0.5 * (head_.action_high - head_.action_low);
      Eigen::ArrayXXd t = cache.head_pre.array().tanh();
      Eigen::MatrixXd dpre =
          (upstream.topRows(d).array() * half_span * (1.0 - t * t)).matrix();
      dh = affine(hc, dpre);
      g.log_std = upstream.bottomRows(d).rowwise().sum();
      break;
    }
  }

  for (std::size_t i = hc; i-- > 0;) {
    const Eigen::MatrixXd& a = cache.activations[i + 1];
    Eigen::MatrixXd dz = (dh.array() * (1.0 - a.array() * a.array())).matrix();
    const Eigen::MatrixXd& prev = cache.activations[i];
    g.layers[i].weight = dz * prev.transpose();
    g.layers[i].bias = dz.rowwise().sum();
    if (i > 0) dh = layers_[i].weight.transpose() * dz;
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = static_cast<std::size_t>(log_std_.size());
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (int r = 0; r < l.weight.rows(); ++r)
      for (int c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (int r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  for (int i = 0; i < log_std_.size(); ++i) out.push_back(log_std_(i));
  return out;
}

void Mlp::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count())
    throw std::invalid_argument("set_parameters: size mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (int r = 0; r < l.weight.rows(); ++r)
      for (int c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[k++];
    for (int r = 0; r < l.bias.size(); ++r) l.bias(r) = values[k++];
  }
  for (int i = 0; i < log_std_.size(); ++i) log_std_(i) = values[k++];
}

bool Mlp::congruent(const Mlp& other) const {
  return sizes_ == other.sizes_ && head_.type == other.head_.type &&
         layers_.size() == other.layers_.size();
}

double sgd_step(Mlp& net, Gradients grads, double lr, std::optional<double> clip) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be positive");
  double factor = 1.0;
  if (clip) {
    const double n = grads.norm();
    if (n > *clip) factor = *clip / n;
  }
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight -= (lr * factor) * grads.layers[i].weight;
    layers[i].bias -= (lr * factor) * grads.layers[i].bias;
  }
  net.log_std() -= (lr * factor) * grads.log_std;
  return factor;
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!target.congruent(source)) throw std::invalid_argument("soft_update: networks are not congruent");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must lie in (0, 1]");
  auto& tl = target.layers();
  const auto& sl = source.layers();
  for (std::size_t i = 0; i < tl.size(); ++i) {
    tl[i].weight = tau * sl[i].weight + (1.0 - tau) * tl[i].weight;
    tl[i].bias = tau * sl[i].bias + (1.0 - tau) * tl[i].bias;
  }
  target.log_std() = tau * source.log_std() + (1.0 - tau) * target.log_std();
}

// ---------------------------------------------------------------------------
// Serialization: little-endian fixed-width fields.

namespace {

constexpr char kMagic[8] = {'V', 'T', 'D', 'K', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint32_t kMaxWidth = 1u << 16;

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  void need(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) throw ParseError(std::string("truncated weight file while reading ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    const double v = std::bit_cast<double>(bits);
    if (!std::isfinite(v)) throw ParseError(std::string("non-finite value in ") + what, pos_ - 8);
    return v;
  }
  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const Mlp& net) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(net.head_.type));
  w.u32(static_cast<std::uint32_t>(Activation::tanh));
  w.u32(static_cast<std::uint32_t>(net.sizes_.size()));
  for (int s : net.sizes_) w.u32(static_cast<std::uint32_t>(s));
  w.f64(net.head_.action_low);
  w.f64(net.head_.action_high);
  w.f64(net.head_.init_log_std);
  for (int i = 0; i < net.input_scale_.size(); ++i) w.f64(net.input_scale_(i));
  for (double v : net.parameters()) w.f64(v);
  return w.take();
}

Mlp deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof(kMagic), "magic") != std::string_view(kMagic, sizeof(kMagic)))
    throw ParseError("not a vtoldock weight file (bad magic)", 0);
  const std::size_t version_pos = r.pos();
  if (r.u32("version") != kVersion) throw ParseError("unsupported weight file version", version_pos);
  const std::size_t head_pos = r.pos();
  const std::uint32_t head = r.u32("head type");
  if (head > static_cast<std::uint32_t>(HeadType::gaussian)) throw ParseError("unknown head type", head_pos);
  const std::size_t act_pos = r.pos();
  if (r.u32("activation") != static_cast<std::uint32_t>(Activation::tanh))
    throw ParseError("unknown activation id", act_pos);
  const std::size_t count_pos = r.pos();
  const std::uint32_t count = r.u32("layer count");
  if (count < 2 || count > kMaxLayers) throw ParseError("invalid layer count", count_pos);
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t p = r.pos();
    const std::uint32_t s = r.u32("layer size");
    if (s < 1 || s > kMaxWidth) throw ParseError("invalid layer size", p);
    sizes.push_back(static_cast<int>(s));
  }
  HeadSpec spec;
  spec.type = static_cast<HeadType>(head);
  spec.action_low = r.f64("action_low");
  spec.action_high = r.f64("action_high");
  spec.init_log_std = r.f64("init_log_std");
  if (spec.type == HeadType::gaussian && !(spec.action_high > spec.action_low))
    throw ParseError("invalid gaussian action range", r.pos() - 24);

  Mlp net(sizes, spec, 0);
  Eigen::VectorXd scale(net.input_dim());
  for (int i = 0; i < scale.size(); ++i) scale(i) = r.f64("input scale");
  std::vector<double> params(net.parameter_count());
  for (auto& v : params) v = r.f64("parameters");
  if (!r.at_end()) throw ParseError("trailing bytes after parameters", r.pos());
  net.set_input_scale(scale);
  net.set_parameters(params);
  return net;
}

void save(const Mlp& net, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize(net));
}

Mlp load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

}  // namespace vtoldock::nn
