#pragma once

#include <stdexcept>
#include <string>

namespace bcdlog {

// Base exception. `code()` is a stable machine-readable identifier that the
// CLI reports on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidMaskError : public Error {
 public:
  explicit InvalidMaskError(const std::string& what) : Error("invalid_mask", what) {}
};

class InvalidDigitError : public Error {
 public:
  explicit InvalidDigitError(const std::string& what) : Error("invalid_digit", what) {}
};

class LengthMismatchError : public Error {
 public:
  explicit LengthMismatchError(const std::string& what) : Error("length_mismatch", what) {}
};

// Raised when an annotated template cannot be laid over its message.
class AlignmentError : public Error {
 public:
  AlignmentError(std::string message, std::string template_text)
      : Error("alignment_failure",
              "template '" + template_text + "' does not align with message '" + message + "'"),
        message_(std::move(message)),
        template_(std::move(template_text)) {}

  const std::string& message() const noexcept { return message_; }
  const std::string& template_text() const noexcept { return template_; }

 private:
  std::string message_;
  std::string template_;
};

}  // namespace bcdlog
