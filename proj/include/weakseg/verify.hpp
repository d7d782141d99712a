#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace weakseg {

// One verified quantity: pass iff value OP threshold, where op is "<" or ">".
struct VerifyCase {
  std::string name;
  double value = 0.0;
  std::string op;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCase> cases;

  bool all_pass() const;
  void add(const std::string& name, double value, const std::string& op,
           double threshold);
};

// Self-contained numerical checks, shared by `weakseg verify` and the
// acceptance binary. Deterministic for a fixed seed.

// Mean-field fixed points of the zero-unary label prior satisfy
// q_i(l) ∝ exp(sum_{j != i} k(i,j) q_j(l)) to < 1e-8 on >= 20 random CRFs,
// and on enumerable grids the fixed point is KL-closer to the exact joint
// than 1000 random factorized distributions.
VerifyReport verify_prop31(uint64_t seed = 2024);

// Finite differences vs analytic gradients: classification and neighborhood
// losses (both modes, stop-gradient and full) at 1e-6 absolute on >= 50
// random instances, and the end-to-end network chain at 1e-5 relative on
// models with <= 500 parameters.
VerifyReport verify_gradients(uint64_t seed = 2025);

// Prior solver vs a 10001-point exhaustive oracle on random two-class
// instances; hinge-minimality of the fallback on infeasible instances;
// default constraint values.
VerifyReport verify_prior(uint64_t seed = 2026);

// Lattice filter vs exact filter (relative L1 < 0.05 on >= 20 random scenes)
// and exact filter vs a plain triple-loop oracle (< 1e-10).
VerifyReport verify_filter(uint64_t seed = 2027);

// Potential-form equivalence: AgreeReward vs PottsDisagree updates coincide
// (< 1e-10) for a shared kernel; raw vs normalized kernel differ (> 1e-3).
VerifyReport verify_equivalence(uint64_t seed = 2028);

VerifyReport run_verify_suite(const std::string& suite, uint64_t seed);

// CSV: name,value,op,threshold,pass
void write_verify_csv(const VerifyReport& report, std::ostream& out);

}  // namespace weakseg
