#include <doctest.h>

#include "support/oracles.hpp"
#include "tabood/data/synthetic.hpp"
#include "tabood/density/detectors.hpp"
#include "tabood/density/lof.hpp"
#include "tabood/density/ppca.hpp"
#include "tabood/error.hpp"
#include "tabood/eval/metrics.hpp"

#include <Eigen/LU>
#include <cctype>
#include <cmath>

using namespace tabood;
using namespace tabood::density;

namespace {

const double kLog2Pi = std::log(2.0 * 3.14159265358979323846);

Matrix gaussian(Rng& rng, Eigen::Index n, Eigen::Index d, double s = 1.0) {
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, s);
  return m;
}

Matrix correlated(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Matrix mix = gaussian(rng, d, d, 0.6);
  mix.diagonal().array() += 1.0;
  return gaussian(rng, n, d) * mix;
}

Matrix lattice(int side, double spacing) {
  Matrix m(side * side, 2);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) m.row(i * side + j) << i * spacing, j * spacing;
  return m;
}

models::TrainConfig quick_train(int epochs, double lr = 1e-3, std::uint64_t seed = 1) {
  models::TrainConfig c;
  c.epochs = epochs;
  c.lr = lr;
  c.seed = seed;
  return c;
}

void perturb(FlowModel& flow, Rng& rng, double s) {
  for (CouplingLayer& l : flow.layers) {
    for (Matrix& p : l.scale_net) p += gaussian(rng, p.rows(), p.cols(), s);
    for (Matrix& p : l.shift_net) p += gaussian(rng, p.rows(), p.cols(), s);
  }
}

}  // namespace

TEST_CASE("ppca on isotropic data has unit eigenvalues and vanishing loadings") {
  Rng rng(3);
  const Matrix x = gaussian(rng, 40000, 4);
  const PpcaModel m = fit_ppca(x, 2);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(m.eigenvalues(i) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.sigma2 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.loadings.cwiseAbs().maxCoeff() < 0.25);
  CHECK((m.mean - x.colwise().mean()).cwiseAbs().maxCoeff() <= 1e-12);
  for (Eigen::Index i = 0; i + 1 < 4; ++i) CHECK(m.eigenvalues(i) >= m.eigenvalues(i + 1));
}

TEST_CASE("ppca with one discarded direction reproduces the sample covariance") {
  Rng rng(5);
  const Matrix x = correlated(rng, 500, 5);
  const PpcaModel m = fit_ppca(x, 4);
  const RowVector mu = x.colwise().mean();
  const Matrix c = x.rowwise() - mu;
  const Matrix sample = c.transpose() * c / static_cast<double>(x.rows());
  CHECK((m.covariance() - sample).cwiseAbs().maxCoeff() <= 1e-8);

  const Matrix q = gaussian(rng, 50, 5, 2.0);
  const Vector got = ppca_novelty(m, q);
  const Vector want = testing::dense_gaussian_nll(q, mu, sample);
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("ppca novelty at the mean of a unit gaussian is log 2 pi") {
  const PpcaModel m = make_ppca(RowVector::Zero(2), Matrix::Zero(2, 1), 1.0);
  const Vector s = ppca_novelty(m, Matrix::Zero(1, 2));
  CHECK(s(0) == doctest::Approx(kLog2Pi).epsilon(1e-14));
  CHECK(s(0) == doctest::Approx(1.8379).epsilon(1e-4));
}

TEST_CASE("ppca novelty grows along a ray and ignores translation") {
  Rng rng(8);
  const Matrix x = correlated(rng, 400, 6);
  const PpcaModel m = fit_ppca(x, 2);
  RowVector dir = gaussian(rng, 1, 6).row(0);
  Matrix ray(20, 6);
  for (int t = 0; t < 20; ++t) ray.row(t) = m.mean + 0.3 * t * dir;
  const Vector s = ppca_novelty(m, ray);
  for (int t = 0; t + 1 < 20; ++t) CHECK(s(t + 1) > s(t));

  const RowVector shift = RowVector::Constant(6, 3.5);
  const Matrix q = gaussian(rng, 30, 6);
  const PpcaModel moved = fit_ppca(x.rowwise() + shift, 2);
  const Vector a = ppca_novelty(m, q);
  const Vector b = ppca_novelty(moved, q.rowwise() + shift);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("ppca argument errors and rank deficiency") {
  Rng rng(1);
  const Matrix x = gaussian(rng, 50, 3);
  CHECK_THROWS_AS(fit_ppca(x, 3), InvalidArgument);
  CHECK_THROWS_AS(fit_ppca(x, 0), InvalidArgument);
  Matrix flat = x;
  flat.col(2).setZero();
  flat.col(1).setZero();
  const PpcaModel m = fit_ppca(flat, 1);
  CHECK(m.sigma2 >= kEigenFloor);
  CHECK(ppca_novelty(m, flat).allFinite());
}

TEST_CASE("linear autoencoder learns the identity on whitened data") {
  Rng rng(2);
  const Matrix x = gaussian(rng, 2000, 4);
  AutoencoderConfig cfg;
  cfg.latent = 4;
  cfg.hidden_layers = 0;
  const AutoencoderModel m = fit_autoencoder(x, cfg, quick_train(60, 1e-2));
  CHECK(ae_novelty(m, x).mean() < 1e-3);
}

TEST_CASE("autoencoder score is a squared residual") {
  Rng rng(4);
  const Matrix x = gaussian(rng, 10, 3);
  CHECK(reconstruction_error(x, x).cwiseAbs().maxCoeff() == 0.0);
  const Matrix r = gaussian(rng, 10, 3);
  const Vector one = reconstruction_error(x, x + r);
  const Vector two = reconstruction_error(x, x + 2.0 * r);
  CHECK((two - 4.0 * one).cwiseAbs().maxCoeff() <= 1e-12 * two.maxCoeff());
  CHECK(one(0) == doctest::Approx(r.row(0).squaredNorm() / 3.0).epsilon(1e-14));
}

TEST_CASE("autoencoder default latent width and training determinism") {
  Rng rng(6);
  const Matrix x = gaussian(rng, 300, 10);
  AutoencoderConfig cfg;
  cfg.hidden_width = 16;
  const auto a = fit_autoencoder(x, cfg, quick_train(3));
  const auto b = fit_autoencoder(x, cfg, quick_train(3));
  CHECK(a.latent == 5);
  CHECK(a.epoch_losses == b.epoch_losses);
  CHECK(a.epoch_losses.size() == 3);
  cfg.variational = true;
  const auto va = fit_autoencoder(x, cfg, quick_train(3));
  const auto vb = fit_autoencoder(x, cfg, quick_train(3));
  CHECK(va.epoch_losses == vb.epoch_losses);
  CHECK((vae_novelty(va, x, 4, 11) - vae_novelty(va, x, 4, 11)).cwiseAbs().maxCoeff() == 0.0);
  cfg.latent = 11;
  CHECK_THROWS_AS(fit_autoencoder(x, cfg, quick_train(1)), InvalidArgument);
}

TEST_CASE("vae kl vanishes at the prior") {
  const Vector kl = gaussian_kl(Matrix::Zero(3, 4), Matrix::Zero(3, 4));
  CHECK(kl.cwiseAbs().maxCoeff() == 0.0);
  Matrix mu(1, 1), lv(1, 1);
  mu << 1.0;
  lv << std::log(2.0);
  // 0.5 (1 + 2 - 1 - ln 2)
  CHECK(gaussian_kl(mu, lv)(0) == doctest::Approx(0.5 * (2.0 - std::log(2.0))).epsilon(1e-14));
}

TEST_CASE("vae score matches a direct negative elbo with fixed noise") {
  Rng rng(9);
  const Matrix x = gaussian(rng, 200, 6);
  AutoencoderConfig cfg;
  cfg.variational = true;
  cfg.hidden_width = 12;
  cfg.latent = 2;
  const AutoencoderModel m = fit_autoencoder(x, cfg, quick_train(2));
  const Matrix q = gaussian(rng, 7, 6);
  std::vector<Matrix> noise{gaussian(rng, 7, 2), gaussian(rng, 7, 2), gaussian(rng, 7, 2)};
  const Vector got = vae_novelty_with_noise(m, q, noise);

  // forward pass written out layer by layer
  auto dense = [](const Matrix& in, const Matrix& w, const Matrix& b, bool relu) {
    Matrix out = in * w;
    for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) += b.row(0);
    return relu ? Matrix(out.cwiseMax(0.0)) : out;
  };
  auto run = [&](const std::vector<Matrix>& p, Matrix h) {
    for (std::size_t l = 0; l < p.size(); l += 2) h = dense(h, p[l], p[l + 1], l + 2 < p.size());
    return h;
  };
  const Matrix h = run(m.encoder, q);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double kl = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double mu = h(i, j), lv = h(i, 2 + j);
      kl += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
    double rec = 0.0;
    for (const Matrix& eps : noise) {
      Matrix z(1, 2);
      for (int j = 0; j < 2; ++j) z(0, j) = h(i, j) + std::exp(0.5 * h(i, 2 + j)) * eps(i, j);
      const Matrix out = run(m.decoder, z);
      rec += 0.5 * (q.row(i) - out.row(0)).squaredNorm() + 0.5 * 6.0 * kLog2Pi;
    }
    const double want = kl + rec / 3.0;
    CHECK(std::abs(got(i) - want) <= 1e-10);
  }
}

TEST_CASE("identity flow scores the standard normal") {
  Rng rng(10);
  const FlowModel flow = init_flow(3, FlowConfig{}, rng);
  CHECK(flow.layers.size() == 6);
  CHECK(flow.layers[0].mask == RowVector((RowVector(3) << 1, 0, 0).finished()));
  CHECK(flow.layers[1].mask == RowVector((RowVector(3) << 0, 1, 1).finished()));
  const Matrix x = gaussian(rng, 20, 3);
  const Vector s = flow_novelty(flow, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    CHECK(s(i) == doctest::Approx(0.5 * x.row(i).squaredNorm() + 1.5 * kLog2Pi).epsilon(1e-14));
}

TEST_CASE("flow inverse and log determinant") {
  Rng rng(12);
  FlowModel flow = init_flow(2, FlowConfig{}, rng);
  perturb(flow, rng, 0.1);
  const Matrix x = gaussian(rng, 50, 2, 1.5);
  Vector log_det;
  const Matrix y = flow.forward(x, log_det);
  CHECK((y - x).cwiseAbs().maxCoeff() > 1e-3);
  CHECK(log_det.cwiseAbs().maxCoeff() > 0.1);
  CHECK((flow.inverse(y) - x).cwiseAbs().maxCoeff() < 1e-6);

  const double h = 1e-5;
  for (Eigen::Index i = 0; i < 10; ++i) {
    Eigen::Matrix2d jac;
    for (int c = 0; c < 2; ++c) {
      Matrix up = x.row(i), down = x.row(i);
      up(0, c) += h;
      down(0, c) -= h;
      Vector ignore;
      jac.col(c) = ((flow.forward(up, ignore) - flow.forward(down, ignore)).row(0) / (2 * h)).transpose();
    }
    CHECK(std::abs(std::log(std::abs(jac.determinant())) - log_det(i)) < 1e-4);
  }
  const Matrix per_layer = flow.layer_log_dets(x);
  CHECK(per_layer.cols() == 6);
  CHECK((per_layer.rowwise().sum() - log_det).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("trained flow density integrates to at most one") {
  const data::Dataset ds = data::make_toy2d(1500, 3, 4);
  FlowConfig cfg;
  cfg.hidden_width = 32;
  const FlowModel flow = fit_flow(ds.features, cfg, quick_train(15, 3e-3));
  CHECK(flow.epoch_losses.back() < flow.epoch_losses.front());
  const int n = 200;
  const double lo = -7.0, hi = 7.0, cell = (hi - lo) / n;
  Matrix grid(n * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid.row(i * n + j) << lo + (i + 0.5) * cell, lo + (j + 0.5) * cell;
  const Vector nov = flow_novelty(flow, grid);
  const double mass = (-nov.array()).exp().sum() * cell * cell;
  CHECK(mass <= 1.05);
  CHECK(mass > 0.5);
}

TEST_CASE("flow rejects one dimensional data") {
  Rng rng(1);
  CHECK_THROWS_AS(init_flow(1, FlowConfig{}, rng), InvalidArgument);
  CHECK_THROWS_AS(fit_flow(gaussian(rng, 10, 2, 1e200), FlowConfig{}, quick_train(1)), DivergedTraining);
}

TEST_CASE("lof on a lattice") {
  const Matrix grid = lattice(15, 1.0);
  const NeighborIndex index = build_neighbor_index(grid, 5);
  Matrix q(2, 2);
  q << 7.0, 7.0, 7.0, 24.0;
  const Vector s = lof_novelty(index, q);
  CHECK(std::abs(s(0) - 1.0) <= 0.05);
  CHECK(s(1) > 2.0);
  // k-distance of a stored point is the distance to its k-th nearest other point
  CHECK(index.k_distance(7 * 15 + 7) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("lof is invariant to scaling and translation") {
  Rng rng(14);
  const Matrix x = gaussian(rng, 150, 3);
  const Matrix q = gaussian(rng, 25, 3, 2.0);
  const Vector base = lof_novelty(build_neighbor_index(x, 10), q);
  const Vector scaled = lof_novelty(build_neighbor_index(7.5 * x, 10), 7.5 * q);
  CHECK((base - scaled).cwiseAbs().maxCoeff() <= 1e-9);
  const RowVector shift = RowVector::Constant(3, -4.0);
  const Vector moved = lof_novelty(build_neighbor_index(x.rowwise() + shift, 10), q.rowwise() + shift);
  CHECK((base - moved).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("lof matches the brute-force oracle exactly") {
  Rng rng(15);
  const Matrix x = gaussian(rng, 100, 4);
  const Matrix q = gaussian(rng, 40, 4, 1.5);
  for (int k : {1, 5, 20}) {
    const Vector got = lof_novelty(build_neighbor_index(x, k), q);
    const Vector want = testing::brute_force_lof(x, q, k);
    for (Eigen::Index i = 0; i < q.rows(); ++i) CHECK(got(i) == want(i));
  }
}

TEST_CASE("lof with duplicate points stays finite") {
  Matrix x = Matrix::Zero(30, 2);
  x.bottomRows(10).setOnes();
  const NeighborIndex index = build_neighbor_index(x, 5);
  CHECK(index.lrd.allFinite());
  const Vector s = lof_novelty(index, x.topRows(3));
  CHECK(s.allFinite());
  CHECK(s(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_neighbor_index(x, 30), InvalidArgument);
  CHECK_THROWS_AS(build_neighbor_index(x, 0), InvalidArgument);
}

TEST_CASE("lof neighbours are ordered by distance then index") {
  Matrix x(4, 1);
  x << 1.0, -1.0, 2.0, 0.0;
  const NeighborIndex index = build_neighbor_index(x, 2);
  CHECK(index.neighbors(RowVector::Zero(1)) == IndexVector{3, 0});
  CHECK(index.neighbors(RowVector::Zero(1), 3) == IndexVector{0, 1});
}

TEST_CASE("density detectors separate a distant population") {
  Rng rng(20);
  const Matrix id = gaussian(rng, 600, 8);
  const Matrix test = gaussian(rng, 200, 8);
  const Matrix ood = (gaussian(rng, 200, 8).array() + 6.0).matrix();
  DensityOptions opt;
  opt.autoencoder.hidden_width = 32;
  opt.flow.hidden_width = 16;
  opt.flow.layers = 4;
  opt.train = quick_train(5);
  for (Method m : all_methods()) {
    CAPTURE(to_string(m));
    const auto det = fit_density(m, id, opt);
    CHECK(det->name() == to_string(m));
    std::string lower = to_string(m);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    CHECK(parse_method(lower) == m);
    const auto hash = artifact_hash(*det);
    eval::ScorePair pair;
    const Vector a = det->score(test), b = det->score(ood);
    pair.id_scores.assign(a.data(), a.data() + a.size());
    pair.ood_scores.assign(b.data(), b.data() + b.size());
    CHECK(eval::auroc(pair) > 0.95);
    CHECK(artifact_hash(*det) == hash);
    CHECK((det->score(test) - a).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(parse_method("nope"), InvalidArgument);
}
