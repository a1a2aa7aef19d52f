#pragma once

#include <stdexcept>
#include <string>

namespace selfverify {

// Base for everything this library throws on purpose. Callers that want to
// survive a single bad problem catch Error; harness-level failures (auth,
// replay misses, broken configs) have their own types so the CLI can map them
// to distinct exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& msg) : Error(msg) {}
};

class KindMismatchError : public Error {
 public:
  explicit KindMismatchError(const std::string& msg) : Error(msg) {}
};

class NoMaskError : public Error {
 public:
  explicit NoMaskError(const std::string& msg) : Error(msg) {}
};

class NoMaskableTokensError : public Error {
 public:
  explicit NoMaskableTokensError(const std::string& msg) : Error(msg) {}
};

class AllExtractionsFailedError : public Error {
 public:
  explicit AllExtractionsFailedError(const std::string& msg) : Error(msg) {}
};

class LengthMismatchError : public Error {
 public:
  explicit LengthMismatchError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class AuthError : public Error {
 public:
  explicit AuthError(const std::string& msg) : Error(msg) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& msg) : Error(msg) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Raised in replay-only mode when a request is not in the cache. Carries the
// fingerprint so the CLI can name the first missing request.
class ReplayMissError : public Error {
 public:
  ReplayMissError(const std::string& msg, std::string fingerprint)
      : Error(msg), fingerprint_(std::move(fingerprint)) {}
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string fingerprint_;
};

}  // namespace selfverify
