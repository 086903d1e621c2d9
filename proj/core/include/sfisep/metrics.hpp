#pragma once

#include <string>
#include <vector>

#include "sfisep/audio.hpp"

namespace sfisep {

// Scale-invariant BSS ratios in dB, each capped at +-100.
struct SiMetrics {
  double si_sdr = 0;
  double si_sir = 0;
  double si_sar = 0;
};

// Decomposes the estimate against the target/interference pair:
//   s_t = (<est, s> / ||s||^2) s,
//   P   = orthogonal projection onto span{s, n} (2x2 Gram solve, pseudo-inverse
//         discarding eigenvalues below 1e-12 of the largest),
//   e_i = P est - s_t,   e_a = est - P est,
//   SI-SDR = 10 log10(||s_t||^2 / ||est - s_t||^2),
//   SI-SIR = 10 log10(||s_t||^2 / ||e_i||^2),
//   SI-SAR = 10 log10(||s_t + e_i||^2 / ||e_a||^2).
// A silent target raises undefined-metric; length mismatch raises
// invalid-argument. Multichannel buffers are flattened by concatenating
// channels before projecting.
SiMetrics si_decompose(const std::vector<double>& estimate, const std::vector<double>& target,
                       const std::vector<double>& interference);

SiMetrics si_decompose(const AudioBuffer& estimate, const AudioBuffer& target,
                       const AudioBuffer& interference);

struct EvalItem {
  std::string name;
  AudioBuffer estimate;  // foreground estimate
  AudioBuffer foreground;
  AudioBuffer background;
  AudioBuffer mixture;
};

struct ItemMetrics {
  std::string name;
  SiMetrics processed;  // estimate vs references
  SiMetrics unprocessed;  // mixture treated as the estimate
  SiMetrics delta;      // processed - unprocessed
};

struct ColumnStats {
  double mean = 0;
  double stddev = 0;  // population
};

struct MetricReport {
  std::vector<ItemMetrics> items;
  std::vector<std::pair<std::string, std::string>> skipped;  // (name, reason)
  ColumnStats processed_sdr, processed_sir, processed_sar;
  ColumnStats unprocessed_sdr, unprocessed_sir, unprocessed_sar;
  ColumnStats delta_sdr, delta_sir, delta_sar;
};

// Items that fail to evaluate are skipped with a recorded reason; an empty
// result set raises invalid-argument.
MetricReport evaluate_items(const std::vector<EvalItem>& items);

std::string report_text(const MetricReport& report);
std::string report_json(const MetricReport& report);  // serialized document

}  // namespace sfisep
