#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>

#include "tandem/validation.hpp"

int main(int argc, char** argv) {
  tandem::ValidationOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (int id = 1; id <= 9; ++id) {
    if (!opts.only.empty() && !opts.only.count(id)) continue;
    tandem::ValidationOptions one = opts;
    one.only = {id};
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = tandem::run_acceptance(one);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& r : results) {
      for (const auto& m : r.measurements)
        std::printf("    %s %-66s %.6g %s %.3g%s\n", m.passed ? "ok  " : "MISS",
                    m.name.c_str(), m.value, m.relation.c_str(), m.threshold,
                    m.gating ? "" : "  (info)");
      if (!r.note.empty()) std::printf("    note: %s\n", r.note.c_str());
      std::printf("CRITERION %d: %s  %s  [%.1f s]\n", r.id, r.passed() ? "PASS" : "FAIL",
                  r.title.c_str(), secs);
      std::fflush(stdout);
      if (!r.passed()) ++failed;
    }
  }
  std::printf("%d criterion(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}
