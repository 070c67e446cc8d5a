#pragma once

#include <stdexcept>
#include <string>

namespace distill {

// Shapes or factorizations that do not line up.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An operation needed a bipartite (or square V⊗V) label it did not get.
struct LabelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numeric argument outside the mathematically valid range.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace distill
