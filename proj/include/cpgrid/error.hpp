#pragma once

#include <stdexcept>
#include <string>

namespace cpgrid {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, shape mismatches, violated invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two tensors that must share a GridSpec do not.
class SpecMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Failure opening, reading or writing a file. The message names the path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(what + ": " + path), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed CPTF container or sidecar.
class FormatError : public Error {
 public:
  enum class Kind {
    BadMagic,
    BadVersion,
    BadDtype,
    DimMismatch,
    LengthMismatch,
    NonFinite,
    BadSidecar,
  };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace cpgrid
