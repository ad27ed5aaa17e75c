#pragma once

#include <stdexcept>
#include <string>

namespace concierge {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind { usage, data, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class QueryError : public Error {
 public:
  explicit QueryError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class StatsError : public Error {
 public:
  explicit StatsError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::usage, what) {}
};

}  // namespace concierge
