// The invariant battery: every module-level property as a randomized check
// with its own generator. Shared by the property test binary and the
// acceptance run.

#ifndef FLAGCOUNT_TESTS_PROPERTIES_HPP
#define FLAGCOUNT_TESTS_PROPERTIES_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace props {

struct Outcome {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0 && cases > 0; }
};

struct Property {
  std::string module;
  std::string name;
  std::function<Outcome(std::uint64_t seed)> run;
  // False for the few fixed-input checks that are not randomized.
  bool randomized = true;
};

const std::vector<Property>& all_properties();

}  // namespace props

#endif
