#include "volcast/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "volcast/error.hpp"
#include "volcast/spectral.hpp"

namespace volcast {

using ad::Matrix;
using ad::Tensor;

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
  };
  require(latent_dim > 0 && align_dim > 0 && blocks >= 0 && inception_width > 0, "sizes must be positive");
  require(lookback >= 2, "lookback must be at least 2");
  require(horizon >= 1, "horizon must be at least 1");
  require(top_k >= 1 && top_k <= lookback, "top_k must lie in [1, lookback]");
  require(label_len >= 0 && label_len <= lookback, "label_len must lie in [0, lookback]");
  require(align_weight >= 0.0, "align_weight must be non-negative");
  require(temperature > 0.0, "temperature must be positive");
  require(news_dim > 0 && feature_dim > 0 && marker_dim > 0, "input widths must be positive");
  require(!kernel_sizes.empty(), "kernel_sizes must not be empty");
  for (int k : kernel_sizes) require(k > 0 && k % 2 == 1, "kernel sizes must be positive and odd");
}

FeatureScaler FeatureScaler::fit(const std::vector<FeatureRow>& rows) {
  FeatureScaler s;
  std::size_t n = 0;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(kFeatureDim);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(kFeatureDim);
  for (const auto& r : rows) {
    if (r.split != Split::Train) continue;
    const Eigen::Map<const Eigen::RowVectorXd> x(r.x.data(), Eigen::Index(kFeatureDim));
    sum += x;
    ++n;
  }
  if (n == 0) return s;
  s.mean = sum / double(n);
  double level = 0.0;
  for (const auto& r : rows)
    if (r.split == Split::Train) level += r.target.aggregated;
  if (level > 0.0) s.target_scale = level / double(n);
  for (const auto& r : rows) {
    if (r.split != Split::Train) continue;
    const Eigen::Map<const Eigen::RowVectorXd> x(r.x.data(), Eigen::Index(kFeatureDim));
    sq += (x - s.mean).cwiseAbs2();
  }
  s.scale = (sq / double(n)).cwiseSqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i)
    if (!(s.scale[i] > 1e-12)) s.scale[i] = 1.0;
  return s;
}

Matrix FeatureScaler::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error(ErrorCode::ShapeMismatch, "scaler width differs from input");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

double AlignmentPair::temperature() const { return std::exp(log_temperature.item()); }

Tensor info_nce(const AlignmentPair& pair) {
  const Eigen::Index T = pair.price.rows();
  if (T < 2) throw Error(ErrorCode::DegenerateWindow, "contrastive loss needs at least two positions");
  if (pair.price.rows() != pair.news.rows() || pair.price.cols() != pair.news.cols())
    throw Error(ErrorCode::ShapeMismatch, "alignment pair shapes differ");
  const Tensor inv_temperature = ad::exp(ad::scale_shift(pair.log_temperature, -1.0));
  const Tensor logits = ad::mul_scalar(ad::matmul(pair.price, ad::transpose(pair.news)), inv_temperature);
  std::vector<Eigen::Index> labels(static_cast<std::size_t>(T));
  for (Eigen::Index i = 0; i < T; ++i) labels[std::size_t(i)] = i;
  return ad::softmax_cross_entropy(logits, labels);
}

Tensor harmonic_encoding(const std::vector<CalendarMarker>& markers) {
  const auto T = Eigen::Index(markers.size());
  Matrix angle(T, 3);
  const double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& m = markers[std::size_t(t)];
    angle(t, 0) = two_pi * m.day_of_week / 5.0;
    angle(t, 1) = two_pi * (m.day_of_month - 1) / 31.0;
    angle(t, 2) = two_pi * (m.month - 1) / 12.0;
  }
  const Tensor a = Tensor::constant(std::move(angle));
  return ad::concat_cols({ad::sin(a), ad::cos(a)});
}

Tensor spectral_filter(const Tensor& x, Eigen::Index k) {
  const auto spectrum = spectral::dft(x.value());
  const auto kept = spectral::top_k_indices(spectrum.energies, k);
  return ad::matmul(Tensor::constant(spectral::projection_matrix<double>(x.rows(), kept)), x);
}

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Matrix zeros(Eigen::Index rows, Eigen::Index cols) { return Matrix::Zero(rows, cols); }

/// Broadcast a T x 1 column across `width` columns.
Tensor broadcast_cols(const Tensor& column, Eigen::Index width) {
  return ad::matmul(column, Tensor::constant(Matrix::Ones(1, width)));
}

Tensor broadcast_rows(const Tensor& row, Eigen::Index height) {
  return ad::matmul(Tensor::constant(Matrix::Ones(height, 1)), row);
}

}  // namespace

M2vn::M2vn(ModelConfig config, FeatureScaler scaler, std::uint64_t seed)
    : config_(std::move(config)), scaler_(std::move(scaler)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const Eigen::Index d = config_.latent_dim, d3 = 3 * d, da = config_.align_dim, di = config_.inception_width;
  const Eigen::Index T = config_.lookback, H = config_.horizon, fx = config_.feature_dim;
  auto glorot = [&](Eigen::Index fan_in, Eigen::Index fan_out) {
    return random_matrix(rng, fan_in, fan_out, std::sqrt(2.0 / double(fan_in + fan_out)));
  };

  params_.add("price.norm_gamma", Matrix::Ones(1, fx));
  params_.add("price.norm_beta", zeros(1, fx));
  params_.add("price.lift_w", glorot(fx, d));
  params_.add("price.lift_b", zeros(1, d));
  params_.add("news.proj_w", glorot(config_.news_dim, d));
  params_.add("news.proj_b", zeros(1, d));
  params_.add("time.lift_w", glorot(2 * config_.marker_dim, d));
  params_.add("time.lift_b", zeros(1, d));
  params_.add("time.weekday", random_matrix(rng, 7, d, 0.1));

  for (int l = 0; l < config_.blocks; ++l) {
    const auto L = std::size_t(l);
    params_.add(block_name(L, "ln_gamma"), Matrix::Ones(1, d3));
    params_.add(block_name(L, "ln_beta"), zeros(1, d3));
    for (int s : config_.kernel_sizes) {
      const Eigen::Index ss = Eigen::Index(s) * s;
      params_.add(block_name(L, "inc1.k" + std::to_string(s) + ".w"), glorot(d3 * ss, di));
      params_.add(block_name(L, "inc1.k" + std::to_string(s) + ".b"), zeros(1, di));
    }
    for (int s : config_.kernel_sizes) {
      const Eigen::Index ss = Eigen::Index(s) * s;
      params_.add(block_name(L, "inc2.k" + std::to_string(s) + ".w"), glorot(di * ss, d3));
      params_.add(block_name(L, "inc2.k" + std::to_string(s) + ".b"), zeros(1, d3));
    }
    params_.add(block_name(L, "gate_w"), glorot(2 * d, 1));
    params_.add(block_name(L, "gate_b"), zeros(1, 1));
    params_.add(block_name(L, "fuse_w"), glorot(d3, d3));
    params_.add(block_name(L, "fuse_b"), zeros(1, d3));
  }

  params_.add("align.price_w", glorot(d3, da));
  params_.add("align.price_b", zeros(1, da));
  params_.add("align.news_w", glorot(d3, da));
  params_.add("align.news_b", zeros(1, da));
  params_.add("align.log_temperature", Matrix::Constant(1, 1, std::log(config_.temperature)));

  // Identity over the window; the forecast rows start as the mean of the final label_len positions.
  Matrix wp = zeros(T + H, T);
  wp.topRows(T).setIdentity();
  const Eigen::Index ctx = std::max<Eigen::Index>(config_.label_len, 1);
  for (Eigen::Index h = 0; h < H; ++h) wp.row(T + h).tail(ctx).setConstant(1.0 / double(ctx));
  params_.add("head.temporal", std::move(wp));
  params_.add("head.out_w", glorot(d, 1));
  params_.add("head.out_b", Matrix::Constant(1, 1, std::log(std::numbers::e - 1.0)));
}

std::string M2vn::block_name(std::size_t layer, const std::string& part) const {
  return "block" + std::to_string(layer) + "." + part;
}

void M2vn::set_output_level(double value) {
  // softplus^-1 in units of the target scale
  const double v = value / scaler_.target_scale;
  const double b = v > 30.0 ? v : std::log(std::expm1(std::max(v, 1e-12)));
  params_.at("head.out_b").mutable_value()(0, 0) = b;
}

LatentState M2vn::encode(const WindowSample& sample) const {
  const Eigen::Index T = config_.lookback;
  if (sample.features.rows() != T || sample.features.cols() != config_.feature_dim)
    throw Error(ErrorCode::ShapeMismatch, "features must be " + std::to_string(T) + "x" +
                                              std::to_string(config_.feature_dim));
  if (sample.news.rows() != T || sample.news.cols() != config_.news_dim)
    throw Error(ErrorCode::ShapeMismatch, "news must be " + std::to_string(T) + "x" + std::to_string(config_.news_dim));
  if (Eigen::Index(sample.markers.size()) != T) throw Error(ErrorCode::ShapeMismatch, "markers must have T rows");

  Matrix x = scaler_.apply(sample.features);
  if (!mask_.volume) x.col(kVolume).setZero();
  const Tensor xs = Tensor::constant(std::move(x));
  const Tensor normalized = ad::add_row(ad::mul(xs, broadcast_rows(params_.at("price.norm_gamma"), T)),
                                        params_.at("price.norm_beta"));
  const Tensor lifted = ad::affine(normalized, params_.at("price.lift_w"), params_.at("price.lift_b"));

  LatentState s;
  s.price = spectral_filter(lifted, config_.top_k);

  const Tensor news_in = Tensor::constant(mask_.news ? sample.news : Matrix::Zero(T, config_.news_dim));
  s.news = ad::affine(news_in, params_.at("news.proj_w"), params_.at("news.proj_b"));

  std::vector<Eigen::Index> weekday;
  for (const auto& m : sample.markers) weekday.push_back(std::clamp<Eigen::Index>(m.day_of_week, 0, 6));
  s.time = ad::add(ad::affine(harmonic_encoding(sample.markers), params_.at("time.lift_w"), params_.at("time.lift_b")),
                   ad::embedding_lookup(params_.at("time.weekday"), weekday));

  s.joint = ad::concat_cols({s.price, s.news, s.time});
  return s;
}

Tensor M2vn::inception(std::size_t layer, const std::string& stage, const Tensor& grid, Eigen::Index height,
                       Eigen::Index width) const {
  std::vector<Tensor> branches;
  for (int s : config_.kernel_sizes) {
    const std::string k = stage + ".k" + std::to_string(s);
    branches.push_back(ad::conv2d(grid, params_.at(block_name(layer, k + ".w")), params_.at(block_name(layer, k + ".b")),
                                  height, width, s, s));
  }
  Tensor total = branches.front();
  for (std::size_t i = 1; i < branches.size(); ++i) total = ad::add(total, branches[i]);
  return ad::scale_shift(total, 1.0 / double(branches.size()));
}

Tensor M2vn::spectral_conv(std::size_t layer, const Tensor& h) const {
  const Eigen::Index T = h.rows(), d = config_.latent_dim;
  const Tensor x = ad::layer_norm(h, params_.at(block_name(layer, "ln_gamma")), params_.at(block_name(layer, "ln_beta")));
  const Tensor price = ad::slice_cols(x, 0, d);
  const Tensor filtered = spectral_filter(price, config_.top_k);
  const Tensor state = ad::concat_cols({filtered, ad::slice_cols(x, d, 2 * d)});

  const Eigen::Index n_periods = std::min<Eigen::Index>(config_.top_k, T / 2);
  const auto periods = spectral::dominant_periods(spectral::dft(price.value()), n_periods);

  std::vector<Tensor> outputs;
  for (const auto& p : periods) {
    const Eigen::Index width = T / p.frequency;
    const Eigen::Index height = (T + width - 1) / width;
    // Row-major (cycle, phase) folding puts time step t at grid cell t; pad the ragged tail with zeros.
    std::vector<Eigen::Index> source(std::size_t(height * width * state.cols()), -1);
    for (Eigen::Index i = 0; i < T * state.cols(); ++i) source[std::size_t(i)] = i;
    const Tensor grid = ad::gather(state, height * width, state.cols(), source);
    const Tensor hidden = ad::silu(inception(layer, "inc1", grid, height, width));
    const Tensor out = inception(layer, "inc2", hidden, height, width);
    outputs.push_back(ad::slice_rows(out, 0, T));
  }
  Tensor total = outputs.front();
  for (std::size_t i = 1; i < outputs.size(); ++i) total = ad::add(total, outputs[i]);
  return ad::scale_shift(total, 1.0 / double(outputs.size()));
}

GateOutput M2vn::gated_fusion(std::size_t layer, const Tensor& r, const Tensor& t) const {
  if (r.rows() != t.rows() || r.cols() != t.cols() || r.cols() != config_.latent_dim)
    throw Error(ErrorCode::ShapeMismatch, "gated fusion needs matching T x d inputs");
  GateOutput g;
  g.gate = ad::sigmoid(ad::affine(ad::concat_cols({r, t}), params_.at(block_name(layer, "gate_w")),
                                  params_.at(block_name(layer, "gate_b"))));
  const Tensor a = broadcast_cols(g.gate, r.cols());
  g.fused = ad::add(ad::mul(a, r), ad::mul(ad::scale_shift(a, -1.0, 1.0), t));
  const Tensor interactions = ad::concat_cols({g.fused, ad::mul(r, t), ad::abs(ad::sub(r, t))});
  g.out = ad::affine(interactions, params_.at(block_name(layer, "fuse_w")), params_.at(block_name(layer, "fuse_b")));
  return g;
}

Tensor M2vn::dynamics_block(std::size_t layer, const Tensor& h) const {
  const Eigen::Index d = config_.latent_dim;
  if (h.rows() != config_.lookback || h.cols() != 3 * d)
    throw Error(ErrorCode::ShapeMismatch, "dynamics block expects T x 3d, got " + h.shape_string());
  const Tensor c = spectral_conv(layer, h);
  const auto g = gated_fusion(layer, ad::slice_cols(c, 0, d), ad::slice_cols(c, d, d));
  return ad::add(h, g.out);
}

AlignmentPair M2vn::align(const Tensor& h) const {
  if (h.cols() != 3 * config_.latent_dim) throw Error(ErrorCode::ShapeMismatch, "align expects T x 3d");
  return {ad::affine(h, params_.at("align.price_w"), params_.at("align.price_b")),
          ad::affine(h, params_.at("align.news_w"), params_.at("align.news_b")), params_.at("align.log_temperature")};
}

Tensor M2vn::project_head(const Tensor& h) const {
  const Eigen::Index T = config_.lookback, H = config_.horizon;
  if (h.rows() != T || h.cols() != 3 * config_.latent_dim)
    throw Error(ErrorCode::ShapeMismatch, "head expects T x 3d, got " + h.shape_string());
  const Tensor extended = ad::matmul(params_.at("head.temporal"), ad::slice_cols(h, 0, config_.latent_dim));
  const Tensor last = ad::slice_rows(extended, T + H - 1, 1);
  return ad::scale_shift(ad::softplus(ad::affine(last, params_.at("head.out_w"), params_.at("head.out_b"))),
                         scaler_.target_scale);
}

ForwardResult M2vn::forward(const WindowSample& sample) const {
  Tensor h = encode(sample).joint;
  for (int l = 0; l < config_.blocks; ++l) h = dynamics_block(std::size_t(l), h);
  return {project_head(h), align(h)};
}

}  // namespace volcast
