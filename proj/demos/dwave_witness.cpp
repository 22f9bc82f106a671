// Exact d-wave witness of the BCS state and a handful of sampled repetitions.
#include "qst/experiments_matter.hpp"

#include <iostream>

int main() {
  using namespace qst;
  BcsDwaveOptions opt;
  opt.params = {5, 5, 0.5, 5.0, Pairing::DWave};
  opt.m = 2000;
  opt.repetitions = 5;
  DwaveResult res = run_bcs_dwave(opt);
  std::cout << "exact witness = " << res.exact_witness << "\n";
  for (double w : res.sampled_witnesses) std::cout << "sampled: " << w << "\n";
  return 0;
}
