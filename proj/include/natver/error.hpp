#ifndef NATVER_ERROR_HPP_
#define NATVER_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace natver {

// Runtime failure in the engine (bad input files, backend failures).
// Contract violations by callers use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace natver

#endif  // NATVER_ERROR_HPP_
