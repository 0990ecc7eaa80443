#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seqlab/config.hpp"

namespace seqlab {

struct GradCheckOptions {
  std::uint64_t seed = 1;
  std::size_t sentences = 2;
  std::size_t max_length = 3;
  std::size_t labels = 3;
  std::size_t byte_dim = 4;
  std::size_t byte_hidden = 3;
  std::size_t word_hidden = 4;
  std::size_t word_dim = 3;
  bool use_bytes = true;
  bool use_words = true;
  bool use_crf = true;
  // Non-zero runs the model in training mode with replayed dropout masks.
  double dropout_rate = 0.0;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Test hook: perturbs the analytic gradient of the named tensor.
  std::string corrupt_tensor;
};

struct TensorCheck {
  std::string name;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  bool passed = true;
};

// Relative error of one entry: |a - n| / max(|a|, |n|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-6;
double gradcheck_relative_error(double analytic, double numeric);

// Builds a tiny random tagger and compares the analytic gradient of the
// full batch loss against central differences for every tensor.
GradCheckReport run_gradcheck(const GradCheckOptions& options);
void write_gradcheck_report(std::ostream& out, const GradCheckReport& report);

}  // namespace seqlab
