#include "stagebench/common/error.hpp"
#include "stagebench/kernels/kernel_spec.hpp"

#include <cmath>

namespace stagebench::kernels {

void validate(const DiscretePdf &pdf) {
  if (pdf.values.empty() || pdf.values.size() != pdf.probs.size()) {
    throw Error(Errc::invalid_argument, "pdf needs equal, non-zero numbers of values and probs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pdf.values.size(); ++i) {
    if (!(pdf.values[i] > 0.0) || !std::isfinite(pdf.values[i])) {
      throw Error(Errc::invalid_argument, "pdf values must be positive");
    }
    if (!(pdf.probs[i] >= 0.0)) {
      throw Error(Errc::invalid_argument, "pdf probabilities must be non-negative");
    }
    total += pdf.probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(Errc::invalid_argument, "pdf probabilities must sum to 1");
  }
}

double sample(const DiscretePdf &pdf, Rng &rng) {
  const double u = std::generate_canonical<double, 64>(rng);
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < pdf.probs.size(); ++i) {
    if (pdf.probs[i] <= 0.0) {
      continue;
    }
    last_positive = i;
    cum += pdf.probs[i];
    if (u < cum) {
      return pdf.values[i];
    }
  }
  // Rounding left u above the accumulated total.
  return pdf.values[last_positive];
}

} // namespace stagebench::kernels
