#pragma once

// Self-test comparing the inference, decoding and loss code against brute
// force enumeration over all projective trees on small random instances.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace treecrf {

struct OracleOptions {
  int instances = 20;       // random instances per (n, root policy)
  int max_n = 5;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  // Perturbs one score seen by the engine but not by the oracle, so that
  // the suite must report a mismatch.
  bool inject_fault = false;
};

struct OracleReport {
  long checks = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

// Progress and failures go to `log` when non-null.
OracleReport run_oracle_check(const OracleOptions& opts, std::ostream* log);

}  // namespace treecrf
