#pragma once

// Pure novelty-score functions. Every score is oriented so that higher means
// more OOD.

#include "tabood/models/classifier.hpp"

#include <limits>
#include <vector>

namespace tabood::posthoc {

// ---- logit confidence ----

enum class Confidence { msp, mls, tempscale, ebo };

/// msp: -max softmax; mls: -max logit; tempscale: -max softmax(l/T);
/// ebo: -T * logsumexp(l/T). Throws InvalidArgument for T <= 0.
Vector score_confidence(const Matrix& logits, Confidence kind, double temperature = 1.0);

/// -T * logsumexp(l/T) per row.
Vector energy(const Matrix& logits, double temperature = 1.0);

/// Mean negative log-likelihood of `labels` under softmax(logits / T).
double softmax_nll(const Matrix& logits, const std::vector<int>& labels, double temperature);

/// Golden-section search for T in [t_min, t_max] (in log T) minimizing NLL.
double fit_temperature(const Matrix& logits, const std::vector<int>& labels, double t_min = 0.05,
                       double t_max = 100.0);

// ---- gradient based ----

/// x' = x - eps * sign(grad_x[-log max softmax(f(x)/T)]) on numeric columns,
/// then -max softmax(f(x')/T).
Vector score_odin(const models::TrainedClassifier& model, const Matrix& x, double temperature, double epsilon);

/// -|| d KL(u || softmax(l)) / dW ||_1 for the final layer, where l = z W + b.
/// The gradient is the outer product z^T (p - u).
Vector score_gradnorm(const Matrix& features, const Matrix& logits);

// ---- class-conditional Gaussians ----

struct ClassStats {
  Matrix means;       // (C, h)
  Matrix covariance;  // (h, h), regularized
  Eigen::LLT<Matrix> factor;
  RowVector background_mean;
  Matrix background_covariance;
  Eigen::LLT<Matrix> background_factor;
  bool has_background = false;
};

/// Sigma + 1e-6 * trace(Sigma) / h * I.
Matrix regularize_covariance(const Matrix& cov);

/// Per-class means and shared (population) covariance. Throws
/// InsufficientClassData if a class in [0, num_classes) has no rows and
/// IllConditionedStats if the regularized covariance is not positive definite.
ClassStats fit_class_stats(const Matrix& features, const std::vector<int>& labels, int num_classes,
                           bool background);

/// Builds stats from explicit parameters (regularization is not applied).
ClassStats make_class_stats(Matrix means, Matrix covariance, std::optional<RowVector> background_mean = {},
                            std::optional<Matrix> background_covariance = {});

/// MDS: min_c (z - mu_c)^T Sigma^-1 (z - mu_c). RMDS: min_c [M_c(z) - M_0(z)].
Vector score_mahalanobis(const Matrix& features, const ClassStats& stats, bool relative);

// ---- feature-space distances ----

/// Rows scaled to unit L2 norm (norms floored at 1e-12).
Matrix l2_normalize_rows(const Matrix& m);

/// Euclidean distance to the k-th nearest bank row. When `normalize`, both
/// query and bank rows are L2-normalized first.
Vector score_knn(const Matrix& features, const Matrix& bank, int k, bool normalize = true);

struct VimSubspace {
  RowVector origin;  // mu
  Matrix basis;      // (h, q) orthonormal columns
  double alpha = 1.0;
};

/// Origin u = -b pinv(W) (the point with zero logits), principal subspace of
/// dimension q from the covariance of (z - u) on ID train, alpha = mean max
/// logit / mean residual norm.
VimSubspace fit_vim(const Matrix& features, const Matrix& logits, const Matrix& head_weight,
                    const RowVector& head_bias, int dim);

/// Residual norm off the subspace.
Vector vim_residual(const Matrix& features, const VimSubspace& vim);

/// Softmax probability of the virtual logit alpha * residual. Throws if the
/// basis is not orthonormal to 1e-8.
Vector score_vim(const Matrix& features, const Matrix& logits, const VimSubspace& vim);

/// Mean feature of correctly classified rows per class.
Matrix fit_she_patterns(const Matrix& features, const Matrix& logits, const std::vector<int>& labels,
                        int num_classes);
/// -<z, s_yhat>.
Vector score_she(const Matrix& features, const Matrix& patterns, const IndexVector& predicted);

/// Mean softmax vector per predicted class.
Matrix fit_klm_templates(const Matrix& probs, int num_classes);
/// min_c KL(t_c || p) with p floored at 1e-12 and 0 ln 0 = 0.
Vector score_klm(const Matrix& probs, const Matrix& templates);

// ---- OpenMax ----

struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
  double shift = 0.0;

  double cdf(double x) const;
};

/// MLE fit on `tail`; shift = min(tail), shape by Newton iterations on the
/// positive residuals.
Weibull fit_weibull(const std::vector<double>& tail);

struct OpenMaxModel {
  Matrix mavs;  // (C, C) mean logit vector per class
  std::vector<Weibull> weibulls;
  int alpha = 1;
};

/// MAVs of correctly classified logits; Weibull per class on the `tail_size`
/// largest distances to the MAV.
OpenMaxModel fit_openmax(const Matrix& logits, const std::vector<int>& labels, int num_classes, int tail_size,
                         int alpha);

/// Softmax over recalibrated logits plus the unknown logit (last column).
Matrix openmax_probabilities(const Matrix& logits, const OpenMaxModel& model);
/// Recalibrated logits with the unknown logit appended.
Matrix openmax_logits(const Matrix& logits, const OpenMaxModel& model);
Vector score_openmax(const Matrix& logits, const OpenMaxModel& model);

// ---- GRAM ----

/// Upper triangle (with diagonal) of (A^p)^T (A^p) per sample, where A holds
/// `rows_per_sample` rows of width w for each sample.
Matrix gram_entries(const Matrix& activation, Eigen::Index rows_per_sample, int power);

struct GramRanges {
  // [layer*powers + power][class] -> (min, max) rows over entries
  std::vector<std::vector<Matrix>> ranges;  // each Matrix is (2, entries)
  std::vector<int> powers;
  std::vector<bool> seen;  // per class
};

GramRanges fit_gram(const std::vector<models::NamedActivation>& activations, const IndexVector& predicted,
                    int num_classes, const std::vector<int>& powers);
/// Relative exceedance of a value against [lo, hi]; denominators floored at 1e-12.
double gram_deviation(double value, double lo, double hi);
Vector score_gram(const std::vector<models::NamedActivation>& activations, const IndexVector& predicted,
                  const GramRanges& ranges);

// ---- activation shaping ----

inline constexpr double kNoClamp = std::numeric_limits<double>::infinity();

/// Logits z W + b.
Matrix head_logits(const Matrix& features, const Matrix& weight, const RowVector& bias);

Matrix react_clamp(const Matrix& features, double c);
/// EBO of the head applied to clamped features.
Vector score_react(const Matrix& features, double c, const Matrix& weight, const RowVector& bias);

/// Keeps the top round(p*h) contributions W_ic * m_i per output unit
/// (ties to the lower index) and zeroes the rest of W.
Matrix dice_mask(const Matrix& weight, const RowVector& mean_activation, double p);
Vector score_dice(const Matrix& features, const Matrix& masked_weight, const RowVector& bias);

enum class AshVariant { prune, scale };
/// Per-row: zero entries below the row's percentile; scale variant rescales
/// survivors by sum(before)/sum(after).
Matrix ash_transform(const Matrix& features, double percentile, AshVariant variant);
Vector score_ash(const Matrix& features, double percentile, AshVariant variant, const Matrix& weight,
                 const RowVector& bias);

}  // namespace tabood::posthoc
