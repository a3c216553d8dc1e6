#ifndef NERM_VERIFY_HPP
#define NERM_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace nerm {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs every oracle-backed consistency check (closed-form moments vs
// enumeration vs Monte Carlo, estimator identities, the SAGA reduction, the
// prox grid oracle, iterate-averaging algebra, the minimizer contract, and
// the pairwise metric) on small deterministic problems.
std::vector<CheckResult> run_verification_suite();

// Prints one row per check and returns the number of failures.
int print_verification_table(std::ostream& out);

}  // namespace nerm

#endif
