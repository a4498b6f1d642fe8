#ifndef QM_ERROR_HPP
#define QM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qm {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Non-conformable shapes, bad axis/factor indices, dim chain mismatches.
struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// An invariant check failed; the message carries the full diagnostic.
struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(what) {}
};

}  // namespace qm

#endif
