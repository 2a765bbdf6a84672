// Verification battery entry point: prints one pass/fail line per criterion
// and exits nonzero if any criterion that ran failed. --fast skips the heavy
// Monte Carlo criteria so the numeric/closed-form ones can be checked quickly.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "rfqv/acceptance.hpp"

int main(int argc, char** argv) {
  rfqv::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--fast") {
      opt.heavy = false;
    } else if (arg == "--seed" && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (arg == "--threads" && i + 1 < argc) {
      opt.threads = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: " << argv[0] << " [--fast] [--seed N] [--threads N]\n";
      return 2;
    }
  }
  const rfqv::AcceptanceReport rep = rfqv::run_acceptance(opt, std::cout);
  return rep.all_ran_passed ? 0 : 1;
}
