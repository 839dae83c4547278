#pragma once

#include <stdexcept>
#include <string>

namespace are {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file or missing required setting.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed user input (question files, run records, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Model output could not be parsed into the expected structure.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Provider-side failures.

class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Network or HTTP failure. Retryable.
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// Quota or rate limit exhausted on the remote side. Not retried.
class QuotaError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class EmptyQuery : public ProviderError {
 public:
  EmptyQuery() : ProviderError("search query is empty") {}
};

/// A mock provider was asked something its fixtures do not cover.
class FixtureMiss : public ProviderError {
 public:
  explicit FixtureMiss(const std::string& what) : ProviderError("fixture miss: " + what) {}
};

/// The chat model returned blank text where content was required.
class EmptyGeneration : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// The editor produced no usable text.
class EmptyEdit : public Error {
 public:
  EmptyEdit() : Error("editor returned no fix") {}
};

// Retrieval failures.

class NoEvidence : public Error {
 public:
  using Error::Error;
};

class EmptyCandidates : public Error {
 public:
  EmptyCandidates() : Error("all search candidates have empty snippets") {}
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error("cosine similarity of an all-zero vector is undefined") {}
};

// Dataset builder.

class UnknownEntity : public Error {
 public:
  explicit UnknownEntity(const std::string& id) : Error("unknown entity: " + id) {}
};

// Entropy analysis.

class NotNormalized : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  EmptySet() : Error("support set is empty") {}
};

}  // namespace are
