// Acceptance gate: runs every criterion bundle and prints one verdict
// line per criterion, followed by the measured values that produced it.
// Exit 0 only when every criterion passes.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "bosegas/verify.hpp"

int main(int argc, char** argv) {
  std::string only;
  int threads = 4;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else if (arg == "--threads" && i + 1 < argc) {
      threads = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only <criterion-id>] [--threads n]\n",
                   argv[0]);
      return 2;
    }
  }

  auto results = bosegas::run_acceptance(only, threads);
  if (results.empty()) {
    std::fprintf(stderr, "no criterion id contains '%s'\n", only.c_str());
    return 2;
  }

  int passed = 0;
  for (const auto& r : results) {
    std::printf("%s %-21s %zu checks in %.1fs: %s\n",
                r.pass ? "PASS" : "FAIL", r.id.c_str(), r.checks.size(),
                r.seconds, r.title.c_str());
    for (const auto& c : r.checks) {
      std::printf("  %-4s %-58s measured %-12.6g bound %-12.6g %s\n",
                  c.pass ? "ok" : "FAIL", c.name.c_str(), c.measured, c.bound,
                  c.note.c_str());
    }
    if (r.pass) ++passed;
  }
  std::printf("%s: %d/%zu criteria\n",
              passed == int(results.size()) ? "ACCEPTED" : "REJECTED", passed,
              results.size());
  return passed == int(results.size()) ? 0 : 1;
}
