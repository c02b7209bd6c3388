#pragma once

#include <stdexcept>
#include <string>

namespace smk {

// Configuration errors are caller mistakes (bad shapes, bad parameters);
// numeric errors are precondition failures discovered while computing.
enum class ErrorKind { kConfig, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void config_error(const std::string& code,
                                      const std::string& message) {
  throw Error(ErrorKind::kConfig, code, message);
}

[[noreturn]] inline void numeric_error(const std::string& code,
                                       const std::string& message) {
  throw Error(ErrorKind::kNumeric, code, message);
}

}  // namespace smk
