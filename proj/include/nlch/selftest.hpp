#pragma once

#include <string>
#include <vector>

namespace nlch {

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Exact identities of the building blocks: kernel values and scaling, well values,
// gradients of constants, transition counts, truncation, constant-field energies,
// and the trivial minimizer.
std::vector<SelfCheck> run_selftest();

}  // namespace nlch
