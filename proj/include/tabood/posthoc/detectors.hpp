#pragma once

#include "tabood/data/dataset.hpp"
#include "tabood/detector.hpp"
#include "tabood/models/classifier.hpp"
#include "tabood/posthoc/scores.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tabood::posthoc {

enum class Method {
  msp, mls, tempscale, odin, ebo, mds, rmds, knn, vim, she, klm, openmax, gram, gradnorm, react, dice, ash
};

/// Display names: MSP, MLS, TempScale, ODIN, EBO, MDS, RMDS, KNN, VIM, SHE,
/// KLM, OpenMax, GRAM, GradNorm, ReAct, DICE, ASH.
std::string to_string(Method m);
/// Case-insensitive.
Method parse_method(const std::string& text);
const std::vector<Method>& all_methods();
/// Methods that refuse an empty validation set.
bool needs_validation(Method m);

struct PosthocOptions {
  int knn_k = 10;
  bool knn_normalize = true;
  double react_percentile = 90.0;
  double dice_p = 0.7;
  double ash_percentile = 65.0;
  AshVariant ash_variant = AshVariant::scale;
  double odin_temperature = 1000.0;
  double odin_epsilon = 0.0014;
  double ebo_temperature = 1.0;
  int openmax_tail = 20;
  /// 0 = min(C, 3).
  int openmax_alpha = 0;
  std::vector<int> gram_powers{1, 2};
  /// 0 = h / 2.
  int vim_dim = 0;
  double temperature_min = 0.05;
  double temperature_max = 100.0;
};

/// Model outputs on the fit data, computed once and shared by all methods.
struct FitData {
  models::ForwardResult train;
  std::vector<int> train_labels;
  models::ForwardResult val;
  std::vector<int> val_labels;
};

FitData prepare_fit_data(const models::TrainedClassifier& model, const data::Dataset& id_train,
                         const data::Dataset& id_val);

/// Detector built on a trained classifier.
class PosthocDetector : public Detector {
public:
  explicit PosthocDetector(std::shared_ptr<const models::TrainedClassifier> model) : model_(std::move(model)) {}

  Vector score(const Matrix& x) const override { return score_forward(x, model_->forward_with_features(x)); }
  /// Same as score(x) with the forward pass on `x` supplied by the caller.
  virtual Vector score_forward(const Matrix& x, const models::ForwardResult& forward) const = 0;

  const models::TrainedClassifier& model() const { return *model_; }

protected:
  std::shared_ptr<const models::TrainedClassifier> model_;
};

std::unique_ptr<PosthocDetector> fit_posthoc(Method method, std::shared_ptr<const models::TrainedClassifier> model,
                                             const FitData& fit, const PosthocOptions& options = {});

std::unique_ptr<PosthocDetector> fit_posthoc(Method method, std::shared_ptr<const models::TrainedClassifier> model,
                                             const data::Dataset& id_train, const data::Dataset& id_val,
                                             const PosthocOptions& options = {});

}  // namespace tabood::posthoc
