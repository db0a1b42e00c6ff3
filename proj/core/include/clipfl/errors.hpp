#pragma once

#include <stdexcept>
#include <string>

namespace clipfl {

/// Base for all library errors. Carries a process exit code so the CLI can
/// map failures without re-classifying them.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 2;
inline constexpr int kIo = 3;
inline constexpr int kInternal = 4;
}  // namespace exit_code

/// Caller violated an API contract (bad index, wrong dimension, unknown kind).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what, exit_code::kConfig) {}
};

/// Input data is numerically or structurally unusable (non-finite values, empty file).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what, exit_code::kConfig) {}
};

/// Configuration failed validation. `field` is a dotted path into the config.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what, exit_code::kConfig), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what, exit_code::kConfig), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, exit_code::kIo) {}
};

/// An internal consistency check failed.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(what, exit_code::kInternal) {}
};

}  // namespace clipfl
