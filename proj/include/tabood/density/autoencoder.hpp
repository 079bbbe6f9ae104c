#pragma once

#include "tabood/models/config.hpp"
#include "tabood/numerics/types.hpp"

#include <cstdint>
#include <vector>

namespace tabood::density {

struct AutoencoderConfig {
  /// 0 = min(16, d / 2).
  int latent = 0;
  int hidden_width = 128;
  /// Hidden layers on each side; 0 gives a linear autoencoder.
  int hidden_layers = 2;
  bool variational = false;
  /// Decoder samples per scored row (VAE).
  int mc_samples = 1;
  std::uint64_t score_seed = 0;
};

/// Encoder / decoder stack. The VAE encoder ends in a 2q-wide layer holding
/// [mu, log variance].
struct AutoencoderModel {
  AutoencoderConfig config;
  std::size_t input_dim = 0;
  int latent = 0;
  std::vector<Matrix> encoder;  // W0, b0, W1, b1, ...
  std::vector<Matrix> decoder;
  std::vector<double> epoch_losses;

  /// Deterministic reconstruction (VAE: decoder applied to the posterior mean).
  Matrix reconstruct(const Matrix& x) const;
  /// Posterior mean and log variance (VAE only).
  void encode(const Matrix& x, Matrix& mu, Matrix& logvar) const;
  Matrix decode(const Matrix& z) const;
};

AutoencoderModel fit_autoencoder(const Matrix& x, const AutoencoderConfig& config, const models::TrainConfig& cfg);

/// Mean squared error per row.
Vector reconstruction_error(const Matrix& x, const Matrix& reconstruction);

/// Mean squared reconstruction error.
Vector ae_novelty(const AutoencoderModel& model, const Matrix& x);

/// KL(N(mu, exp(logvar)) || N(0, I)) per row.
Vector gaussian_kl(const Matrix& mu, const Matrix& logvar);

/// Negative ELBO: closed-form KL plus the unit-variance Gaussian
/// reconstruction NLL averaged over `noise.size()` draws of eps (n x q each).
Vector vae_novelty_with_noise(const AutoencoderModel& model, const Matrix& x, const std::vector<Matrix>& noise);

/// Same with `samples` draws from Rng(seed).
Vector vae_novelty(const AutoencoderModel& model, const Matrix& x, int samples, std::uint64_t seed);

}  // namespace tabood::density
