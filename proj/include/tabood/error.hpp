#pragma once

#include <stdexcept>
#include <string>

namespace tabood {

/// Precondition violated by the caller (bad shape, bad hyperparameter, ...).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite loss.
class DivergedTraining : public std::runtime_error {
public:
  DivergedTraining(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

private:
  int epoch_;
};

/// A class-conditional method found a class with no usable fit samples.
class InsufficientClassData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Covariance still singular after regularization.
class IllConditionedStats : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An ID/OOD split left one side empty.
class DegenerateSplit : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace tabood
