#include "hoki/metrics.hpp"

#include <cmath>
#include <ostream>

#include "hoki/error.hpp"
#include "hoki/format.hpp"

namespace hoki {

BinReport bin_report(std::span<const double> confidences,
                     std::span<const std::uint8_t> correct,
                     const BinPartition& partition) {
  if (confidences.size() != correct.size())
    throw InvalidInput("confidence/correctness length mismatch");
  if (confidences.empty()) throw InvalidInput("bin_report on empty input");

  const std::size_t n = confidences.size();
  std::vector<double> sum_conf(partition.bins, 0.0);
  std::vector<std::size_t> sum_correct(partition.bins, 0);
  std::vector<std::size_t> count(partition.bins, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bin_index(confidences[i], partition);
    sum_conf[j] += confidences[i];
    sum_correct[j] += correct[i];
    ++count[j];
  }

  BinReport report;
  report.partition = partition;
  report.total = n;
  report.bins.resize(partition.bins);
  for (std::size_t j = 0; j < partition.bins; ++j) {
    BinStats& b = report.bins[j];
    b.count = count[j];
    b.weight = static_cast<double>(count[j]) / static_cast<double>(n);
    if (count[j] > 0) {
      b.accuracy = static_cast<double>(sum_correct[j]) / static_cast<double>(count[j]);
      b.mean_confidence = sum_conf[j] / static_cast<double>(count[j]);
      b.gap = b.accuracy - b.mean_confidence;
    }
  }
  return report;
}

double ece(const BinReport& report) {
  double total = 0.0;
  for (const BinStats& b : report.bins) total += b.weight * std::fabs(b.gap);
  return total;
}

double ece(std::span<const double> confidences,
           std::span<const std::uint8_t> correct,
           const BinPartition& partition) {
  return ece(bin_report(confidences, correct, partition));
}

double confidence_stddev(std::span<const double> confidences) {
  if (confidences.empty()) throw InvalidInput("stddev of empty input");
  const double n = static_cast<double>(confidences.size());
  double mean = 0.0;
  for (const double v : confidences) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : confidences) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

void write_bin_report_csv(const BinReport& report, std::ostream& out) {
  out << "bin,lower,upper,count,weight,accuracy,mean_confidence,gap\n";
  for (std::size_t j = 0; j < report.bins.size(); ++j) {
    const BinStats& b = report.bins[j];
    out << j << ',' << format_double(report.partition.lower(j)) << ','
        << format_double(report.partition.upper(j)) << ',' << b.count << ','
        << format_double(b.weight) << ',' << format_double(b.accuracy) << ','
        << format_double(b.mean_confidence) << ',' << format_double(b.gap)
        << '\n';
  }
}

}  // namespace hoki
