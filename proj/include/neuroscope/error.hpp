#pragma once

#include <stdexcept>
#include <string>

namespace neuroscope {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Container magic, version, dtype, or header structure is wrong.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Header and payload disagree (truncation, trailing bytes, bad lengths).
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a domain invariant (non-finite numbers, bad norms,
/// duplicate ids, out-of-range ratings).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied arguments are inconsistent or out of range.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is mathematically undefined for the given data
/// (zero variance, all-zero centered features).
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// The target concept has no labeled neuron. This is the signal that a
/// class is undetected, not a failure of the pipeline.
class ConceptNotDetected : public Error {
 public:
  explicit ConceptNotDetected(std::string concept_name)
      : Error("concept not detected: '" + concept_name + "' has no labeled neuron"),
        concept_(std::move(concept_name)) {}

  const std::string& concept_name() const noexcept { return concept_; }

 private:
  std::string concept_;
};

}  // namespace neuroscope
