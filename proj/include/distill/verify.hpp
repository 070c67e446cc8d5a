#pragma once

// The invariant suite behind `distill verify`: closed forms against
// brute-force simulation, bound identities, operation algebra laws and the
// trace transformations. Output is deterministic for a given seed.

#include <cstdint>
#include <string>
#include <vector>

namespace distill {

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> details;  // first few failure descriptions

  [[nodiscard]] bool passed() const noexcept { return failures == 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  std::vector<std::string> suites;  // empty runs all
  // Added to the protocol-1 closed form; a nonzero value must make the
  // protocol1 suite fail.
  double protocol1Perturbation = 0.0;
};

[[nodiscard]] const std::vector<std::string>& suiteNames();

// Throws ConfigError for an unknown suite name.
[[nodiscard]] std::vector<SuiteResult> runVerification(const VerifyOptions& options);

[[nodiscard]] std::string formatReport(const std::vector<SuiteResult>& results);

}  // namespace distill
