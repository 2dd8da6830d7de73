#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prcut {

struct SuiteResult {
  std::string name;
  std::string description;
  bool passed = false;
  std::size_t cases = 0;
  std::size_t failures = 0;
  /// Largest observed error (or bound violation) and the allowed tolerance.
  double max_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
};

/// Each suite checks the library against an independent oracle on seeded
/// random instances.
SuiteResult verify_quadrature_exactness(std::uint64_t seed);
SuiteResult verify_inverse_moment_oracles(std::uint64_t seed);
SuiteResult verify_integral_bound(std::uint64_t seed);
SuiteResult verify_rcut_bound(std::uint64_t seed);
SuiteResult verify_batch_bound(std::uint64_t seed);
SuiteResult verify_expected_rcut_enumeration(std::uint64_t seed);
SuiteResult verify_lrc_gradient(std::uint64_t seed);
SuiteResult verify_offline_gradient(std::uint64_t seed);
SuiteResult verify_network_gradient(std::uint64_t seed);
SuiteResult verify_hungarian(std::uint64_t seed);

std::vector<SuiteResult> run_verification(std::uint64_t seed);

/// One line per suite plus a closing summary line.
std::string format_verification(const std::vector<SuiteResult>& results);

}  // namespace prcut
