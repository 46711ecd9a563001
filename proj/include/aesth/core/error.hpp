#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aesth {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown rule ids, missing env vars, malformed mapping files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied data that violates an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A JSONL record failed to parse or validate. `line()` is 1-based.
class SchemaError : public InputError {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Verdicts and items (or other joined record sets) disagree on ids.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A model endpoint could not deliver a response after all retries.
class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempt" +
              (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// Raised by transports for failures worth retrying (5xx, 429, connection loss).
class TransientError : public Error {
 public:
  using Error::Error;
};

/// Raised by transports for failures that retrying cannot fix (4xx other than 429).
class RejectedError : public Error {
 public:
  using Error::Error;
};

/// A response arrived but lacks what the caller asked for (refusal, missing
/// rating-word logprobs). Callers record the item as missing.
class IncompleteResponseError : public Error {
 public:
  using Error::Error;
};

/// The endpoint does not offer what the operation needs (e.g. token logprobs).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A mock endpoint received a request its script does not cover.
class ScriptMissError : public Error {
 public:
  using Error::Error;
};

}  // namespace aesth
