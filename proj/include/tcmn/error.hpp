#ifndef TCMN_ERROR_HPP
#define TCMN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tcmn {

// Error categories map one-to-one onto CLI exit codes and C API status codes.
enum class ErrorKind {
  kUsage = 1,    // bad arguments, bad configuration
  kData = 2,     // malformed or inconsistent input files
  kNumeric = 3,  // NaN/Inf detected, shape mismatch inside the graph
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& message) {
  return Error(ErrorKind::kUsage, message);
}
inline Error data_error(const std::string& message) {
  return Error(ErrorKind::kData, message);
}
inline Error numeric_error(const std::string& message) {
  return Error(ErrorKind::kNumeric, message);
}

}  // namespace tcmn

#endif  // TCMN_ERROR_HPP
