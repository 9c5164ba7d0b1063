#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slc {

// Error categories map one-to-one onto CLI exit codes and service error codes.
enum class ErrorKind {
  usage,       // bad configuration or arguments
  data,        // malformed or missing input data
  parse,       // gloss annotation grammar violation
  transport,   // adapter unreachable
  protocol,    // adapter answered with a malformed payload
  conflict,    // optimistic version check failed
  not_found,
  read_only,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit status for an error kind: 1 usage, 2 data, 3 adapter.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace slc
