#pragma once

#include "tabood/density/autoencoder.hpp"
#include "tabood/density/flow.hpp"
#include "tabood/detector.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tabood::density {

enum class Method { ae, vae, flow, ppca, lof };

/// AE, VAE, Flow, PPCA, LOF.
std::string to_string(Method m);
/// Case-insensitive.
Method parse_method(const std::string& text);
const std::vector<Method>& all_methods();

struct DensityOptions {
  AutoencoderConfig autoencoder;
  FlowConfig flow;
  /// 0 = min(16, d / 2).
  int ppca_components = 0;
  int lof_k = 20;
  models::TrainConfig train;
};

/// Fits on the rows of `x` (ID training features in model-input space).
std::unique_ptr<Detector> fit_density(Method method, const Matrix& x, const DensityOptions& options = {});

}  // namespace tabood::density
