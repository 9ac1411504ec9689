#include "hoki/bounds.hpp"

#include <cmath>

#include "hoki/error.hpp"

namespace hoki {

namespace {

void check_common(std::size_t bins, std::uint64_t n, double delta) {
  if (bins < 1) throw InvalidInput("bin count must be >= 1");
  if (n < 1) throw InvalidInput("sample size must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0))
    throw InvalidInput("delta must be in (0, 1]");
}

}  // namespace

double ce_slack(std::size_t bins, std::uint64_t n, double delta) {
  check_common(bins, n, delta);
  const double j = static_cast<double>(bins);
  return j * std::sqrt(2.0) / std::sqrt(static_cast<double>(n)) *
         std::sqrt(2.0 * std::log(2.0) - std::log(delta));
}

double ce_bound(const BoundQuery& query) {
  if (!(query.ece_z >= 0.0 && query.ece_z <= 1.0))
    throw InvalidInput("observed ECE must be in [0, 1]");
  return query.ece_z + ce_slack(query.bins, query.n, query.delta);
}

std::uint64_t n_for_slack(double slack, std::size_t bins, double delta) {
  if (!(slack > 0.0)) throw InvalidInput("slack must be > 0");
  check_common(bins, 1, delta);

  const double j = static_cast<double>(bins);
  const double scale =
      j * std::sqrt(2.0) * std::sqrt(2.0 * std::log(2.0) - std::log(delta));
  const double exact = (scale / slack) * (scale / slack);
  if (exact >= 9e18) throw NumericalError("required sample size overflows");

  auto satisfied = [&](std::uint64_t n) { return ce_slack(bins, n, delta) <= slack; };
  std::uint64_t n = exact < 1.0 ? 1 : static_cast<std::uint64_t>(std::ceil(exact));
  // ceil() of the analytic inverse can be off by one ulp in either
  // direction; settle it against the forward formula.
  while (n > 1 && satisfied(n - 1)) --n;
  while (!satisfied(n)) ++n;
  return n;
}

}  // namespace hoki
