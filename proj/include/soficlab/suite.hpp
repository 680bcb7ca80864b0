#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace soficlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs the full acceptance catalog; one result per criterion. Progress
// lines ("[PASS] ...") go to *progress when given.
std::vector<CriterionResult> run_acceptance(std::ostream* progress);

}  // namespace soficlab
