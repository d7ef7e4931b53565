#pragma once

#include <stdexcept>
#include <string>

namespace spikelab {

// A spike inside the critical window |alpha - 1| <= 1/gamma does not detach
// from the bulk, so no limit theory exists for it. This is a typed error so
// downstream code can never silently produce predictions for such a spike.
class TransitionWindow : public std::runtime_error {
public:
  TransitionWindow(double alpha, double gamma_sq, const std::string& where)
      : std::runtime_error("transition window: spike alpha=" + std::to_string(alpha) +
                           " does not detach at gamma_sq=" + std::to_string(gamma_sq) +
                           " (" + where + ")"),
        alpha(alpha), gamma_sq(gamma_sq) {}
  double alpha;
  double gamma_sq;
};

// An iterative numerical routine exhausted its budget.
class NonConvergence : public std::runtime_error {
public:
  explicit NonConvergence(const std::string& what) : std::runtime_error("non-convergence: " + what) {}
};

// An extreme eigenvector is nearly orthogonal to the spike block; orienting it
// by a spike coordinate would amplify noise, so the condition is surfaced.
class DegenerateProjection : public std::runtime_error {
public:
  explicit DegenerateProjection(const std::string& what)
      : std::runtime_error("degenerate projection: " + what) {}
};

// An eigenvalue expected to detach was found inside the bulk support; the
// replicate is flagged rather than silently mis-assigned.
class PackMismatch : public std::runtime_error {
public:
  explicit PackMismatch(const std::string& what) : std::runtime_error("pack mismatch: " + what) {}
};

class TooFewSamples : public std::runtime_error {
public:
  explicit TooFewSamples(const std::string& what) : std::runtime_error("too few samples: " + what) {}
};

class ShapeMismatch : public std::runtime_error {
public:
  explicit ShapeMismatch(const std::string& what) : std::runtime_error("shape mismatch: " + what) {}
};

} // namespace spikelab
