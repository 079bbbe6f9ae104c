#pragma once

#include "tabood/numerics/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace tabood {

/// Fitted novelty detector. Scores are "higher = more OOD"; score() is const
/// and safe to call concurrently.
class Detector {
public:
  virtual ~Detector() = default;

  virtual std::string name() const = 0;
  /// Hyperparameters, for report provenance.
  virtual nlohmann::json params() const = 0;
  /// Fitted state; stable across scoring calls.
  virtual nlohmann::json artifacts() const = 0;
  /// One score per row of `x` (model-input space).
  virtual Vector score(const Matrix& x) const = 0;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t artifact_hash(const Detector& d) { return fnv1a(d.artifacts().dump()); }

}  // namespace tabood
