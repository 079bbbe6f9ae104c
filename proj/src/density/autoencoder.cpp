#include "tabood/density/autoencoder.hpp"

#include "nets.hpp"
#include "tabood/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace tabood::density {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

IndexVector range(Eigen::Index begin, Eigen::Index count) {
  IndexVector v(static_cast<std::size_t>(count));
  std::iota(v.begin(), v.end(), begin);
  return v;
}

std::vector<Eigen::Index> layer_sizes(Eigen::Index in, const AutoencoderConfig& c, Eigen::Index out) {
  std::vector<Eigen::Index> s{in};
  for (int l = 0; l < c.hidden_layers; ++l) s.push_back(c.hidden_width);
  s.push_back(out);
  return s;
}

}  // namespace

void AutoencoderModel::encode(const Matrix& x, Matrix& mu, Matrix& logvar) const {
  if (!config.variational) throw InvalidArgument("encode: not a variational model");
  const Matrix h = nets::mlp_eval(encoder, x);
  mu = h.leftCols(latent);
  logvar = h.rightCols(latent);
}

Matrix AutoencoderModel::decode(const Matrix& z) const { return nets::mlp_eval(decoder, z); }

Matrix AutoencoderModel::reconstruct(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim) throw InvalidArgument("autoencoder: dimension mismatch");
  const Matrix h = nets::mlp_eval(encoder, x);
  return decode(config.variational ? Matrix(h.leftCols(latent)) : h);
}

AutoencoderModel fit_autoencoder(const Matrix& x, const AutoencoderConfig& config, const models::TrainConfig& cfg) {
  const Eigen::Index d = x.cols();
  AutoencoderModel m;
  m.config = config;
  m.input_dim = static_cast<std::size_t>(d);
  m.latent = config.latent > 0 ? config.latent : static_cast<int>(std::min<Eigen::Index>(16, std::max<Eigen::Index>(1, d / 2)));
  if (m.latent > d) throw InvalidArgument("fit_autoencoder: latent size exceeds the input dimension");
  if (config.hidden_layers < 0 || config.hidden_width < 1) throw InvalidArgument("fit_autoencoder: bad layer sizes");
  if (config.mc_samples < 1) throw InvalidArgument("fit_autoencoder: mc_samples must be >= 1");
  const Eigen::Index q = m.latent;
  Rng rng(mix_seed(cfg.seed, 0));
  m.encoder = nets::init_mlp(layer_sizes(d, config, config.variational ? 2 * q : q), rng);
  m.decoder = nets::init_mlp(layer_sizes(q, config, d), rng);
  const std::size_t n_enc = m.encoder.size();

  std::vector<Matrix*> params;
  for (Matrix& p : m.encoder) params.push_back(&p);
  for (Matrix& p : m.decoder) params.push_back(&p);

  const bool variational = config.variational;
  auto loss = [&](ad::Tape& tape, std::span<const ad::Var> v, const Matrix& batch, Rng& noise) {
    ad::Var xin = tape.constant(batch);
    ad::Var h = nets::mlp_graph(v.subspan(0, n_enc), xin);
    if (!variational) {
      ad::Var rec = nets::mlp_graph(v.subspan(n_enc), h);
      return ad::mean(ad::square(rec - xin));
    }
    ad::Var mu = ad::select_cols(h, range(0, q));
    ad::Var logvar = ad::select_cols(h, range(q, q));
    Matrix eps(batch.rows(), q);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = noise.normal();
    ad::Var z = mu + ad::mul(ad::exp(0.5 * logvar), tape.constant(std::move(eps)));
    ad::Var rec = nets::mlp_graph(v.subspan(n_enc), z);
    const double n = static_cast<double>(batch.rows());
    ad::Var nll = ad::add_scalar(0.5 * ad::sum(ad::square(rec - xin)) * (1.0 / n),
                                 0.5 * static_cast<double>(batch.cols()) * kLog2Pi);
    ad::Var kl = (0.5 / n) * ad::sum(ad::add_scalar(ad::square(mu) + ad::exp(logvar) - logvar, -1.0));
    return nll + kl;
  };
  m.epoch_losses = nets::train(params, x, cfg, loss, variational ? "VAE" : "AE");
  return m;
}

Vector reconstruction_error(const Matrix& x, const Matrix& reconstruction) {
  if (x.rows() != reconstruction.rows() || x.cols() != reconstruction.cols())
    throw InvalidArgument("reconstruction_error: shape mismatch");
  return (x - reconstruction).rowwise().squaredNorm() / static_cast<double>(x.cols());
}

Vector ae_novelty(const AutoencoderModel& model, const Matrix& x) {
  return reconstruction_error(x, model.reconstruct(x));
}

Vector gaussian_kl(const Matrix& mu, const Matrix& logvar) {
  return 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).rowwise().sum().matrix();
}

Vector vae_novelty_with_noise(const AutoencoderModel& model, const Matrix& x, const std::vector<Matrix>& noise) {
  if (noise.empty()) throw InvalidArgument("vae_novelty: need at least one noise draw");
  if (static_cast<std::size_t>(x.cols()) != model.input_dim) throw InvalidArgument("vae_novelty: dimension mismatch");
  Matrix mu, logvar;
  model.encode(x, mu, logvar);
  const Matrix sd = (0.5 * logvar.array()).exp().matrix();
  Vector rec = Vector::Zero(x.rows());
  for (const Matrix& eps : noise) {
    if (eps.rows() != x.rows() || eps.cols() != model.latent) throw InvalidArgument("vae_novelty: noise shape mismatch");
    const Matrix out = model.decode(mu + sd.cwiseProduct(eps));
    rec += 0.5 * (x - out).rowwise().squaredNorm();
  }
  rec /= static_cast<double>(noise.size());
  rec.array() += 0.5 * static_cast<double>(x.cols()) * kLog2Pi;
  return gaussian_kl(mu, logvar) + rec;
}

Vector vae_novelty(const AutoencoderModel& model, const Matrix& x, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("vae_novelty: samples must be >= 1");
  Rng rng(seed);
  std::vector<Matrix> noise;
  for (int s = 0; s < samples; ++s) {
    Matrix eps(x.rows(), model.latent);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
    noise.push_back(std::move(eps));
  }
  return vae_novelty_with_noise(model, x, noise);
}

}  // namespace tabood::density
