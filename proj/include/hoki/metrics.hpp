#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hoki/core.hpp"

namespace hoki {

struct BinStats {
  std::size_t count = 0;
  double weight = 0.0;           // count / N
  double accuracy = 0.0;         // mean correctness over members, 0 if empty
  double mean_confidence = 0.0;  // mean confidence over members, 0 if empty
  double gap = 0.0;              // accuracy - mean_confidence, 0 if empty
};

/// Per-bin reliability statistics. Empty bins keep count 0 and contribute
/// nothing to the calibration error.
struct BinReport {
  BinPartition partition;
  std::size_t total = 0;
  std::vector<BinStats> bins;
};

/// Single pass over the examples in input order; each bin therefore
/// accumulates its sums in ascending example order, which keeps the result
/// bit-identical to a per-bin reference loop.
BinReport bin_report(std::span<const double> confidences,
                     std::span<const std::uint8_t> correct,
                     const BinPartition& partition);

/// Expected calibration error: sum over bins of weight * |gap|.
double ece(std::span<const double> confidences,
           std::span<const std::uint8_t> correct,
           const BinPartition& partition);

double ece(const BinReport& report);

/// Population standard deviation (divide by N). Throws on empty input.
double confidence_stddev(std::span<const double> confidences);

/// CSV rows: bin,lower,upper,count,weight,accuracy,mean_confidence,gap
void write_bin_report_csv(const BinReport& report, std::ostream& out);

}  // namespace hoki
