#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace seqlab {

enum class EarlyStopMetric { kEntityF1, kTokenAccuracy };

EarlyStopMetric parse_metric(std::string_view name);
std::string_view metric_name(EarlyStopMetric metric);

struct TrainConfig {
  double eta0 = 1e-3;
  double rho = 0.05;
  std::size_t epochs = 100;
  std::size_t batch_size = 8;
  double dropout_rate = 0.5;
  std::size_t byte_dim = 50;      // d_b
  std::size_t byte_hidden = 64;   // per direction
  std::size_t word_hidden = 128;  // per direction
  bool use_bytes = true;
  bool use_words = true;
  bool use_crf = true;
  std::uint64_t seed = 1;
  EarlyStopMetric early_stop_metric = EarlyStopMetric::kEntityF1;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Sets one field from its textual form. Keys match the config file:
// eta0, rho, epochs, batch_size, dropout_rate, d_b, byte_hidden,
// word_hidden, use_bytes, use_words, use_crf, seed, early_stop_metric.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

// `key = value` lines; '#' starts a comment. Unknown keys are an error.
TrainConfig parse_config(std::istream& in);
TrainConfig load_config(const std::string& path);
void write_config(std::ostream& out, const TrainConfig& config);

}  // namespace seqlab
