#pragma once

#include <string>
#include <vector>

namespace bosegas {

// One measured assertion inside a criterion. `measured` is the worst
// observed defect (or the key quantity named by `name`), `bound` the
// threshold it was held against.
struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;
  double bound = 0;
  std::string note;
};

// One acceptance criterion: a themed bundle of checks that passes only
// when every check does.
struct CriterionResult {
  std::string id;
  std::string title;
  bool pass = false;
  double seconds = 0;
  std::vector<CheckResult> checks;
};

// Stable criterion ids, in execution order.
const std::vector<std::string>& acceptance_ids();

// Run every criterion whose id contains `filter` (empty = all). `threads`
// caps internal parallelism; results do not depend on the thread count.
std::vector<CriterionResult> run_acceptance(const std::string& filter = "",
                                            int threads = 1);

}  // namespace bosegas
