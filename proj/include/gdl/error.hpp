#pragma once

#include <stdexcept>
#include <string>

namespace gdl {

// Domain error taxonomy. Argument validation uses std::invalid_argument
// directly; everything below signals a condition the caller may want to
// handle distinctly (the CLI maps them to exit codes).

class EmptySupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfGridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingFailureError : public std::runtime_error {
 public:
  TrainingFailureError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class EmptyMaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPredictionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gdl
