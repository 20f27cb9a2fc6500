#ifndef CONDINF_ERRORS_HPP
#define CONDINF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace condinf {

// Root finding / quadrature / differentiation failures.
struct NoSignChange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MaxIterations : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Family / tilting failures.
struct AlphaOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfDomain : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NewtonDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chain / sampler failures. `step` is the 0-based chain index that failed.
struct ChainError : std::runtime_error {
  int step;
  ChainError(const std::string& what, int step_index)
      : std::runtime_error(what + " (step " + std::to_string(step_index) + ")"),
        step(step_index) {}
};
struct EnvelopeViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inference-level failures.
struct NuisanceMleFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FlatProfile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration errors carry the offending field name where known.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace condinf

#endif
