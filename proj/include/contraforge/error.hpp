#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contraforge {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON syntax, wrong schema). Carries the byte offset
// reported by the JSON parser, or the offset of the offending line.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Unbalanced or otherwise malformed bracketed tree.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Tree leaves could not be matched against the source sentence.
class AlignmentError : public Error {
 public:
  AlignmentError(const std::string& token, std::size_t char_offset)
      : Error("leaf token '" + token + "' does not align with sentence at offset " +
              std::to_string(char_offset)),
        token_(token) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

// Transport failure, timeout or unusable response from a model backend.
class BackendError : public Error {
 public:
  BackendError(const std::string& endpoint, const std::string& what)
      : Error(endpoint + ": " + what), endpoint_(endpoint) {}
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

// The backend answered, but with a 4xx status. Not retried.
class ProtocolError : public BackendError {
 public:
  ProtocolError(const std::string& endpoint, int status, const std::string& body)
      : BackendError(endpoint, "HTTP " + std::to_string(status) + ": " + body),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace contraforge
