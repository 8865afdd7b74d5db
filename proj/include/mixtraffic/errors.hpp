#pragma once

#include <stdexcept>
#include <string>

namespace mixtraffic {

/// LQR synthesis could not produce a stabilizing gain.
class SynthesisError : public std::runtime_error {
 public:
  explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

/// A linear solve or iteration broke down numerically.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixtraffic
