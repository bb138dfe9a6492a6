#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msfem {

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

const std::vector<std::string>& acceptance_ids();
CriterionResult run_criterion(const std::string& id);
// Prints one "<id> PASS|FAIL ..." line per criterion; returns the number of failures.
int run_acceptance(std::ostream& out, const std::vector<std::string>& only = {});

}  // namespace msfem
