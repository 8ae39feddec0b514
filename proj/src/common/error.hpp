#pragma once

#include <stdexcept>
#include <string>

namespace odectrl {

enum class ErrorCode {
  InvalidArgument,  // bad shapes, bad config, misuse of an API
  Numerical,        // NaN/Inf, failed factorization, divergence
  Io,               // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_argument(const std::string& what) { return Error(ErrorCode::InvalidArgument, what); }
inline Error numerical_error(const std::string& what) { return Error(ErrorCode::Numerical, what); }
inline Error io_error(const std::string& what) { return Error(ErrorCode::Io, what); }

}  // namespace odectrl
