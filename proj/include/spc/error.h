#pragma once

#include <stdexcept>
#include <string>

namespace spc {

// Failure classes map one-to-one onto CLI exit codes.
enum class ErrorKind
{
  kUsage = 1,
  kData = 2,
  kInternal = 3,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind)
  {}

  ErrorKind kind() const { return kind_; }
  int exitCode() const { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void
throwData(const std::string& what)
{
  throw Error(ErrorKind::kData, what);
}

[[noreturn]] inline void
throwUsage(const std::string& what)
{
  throw Error(ErrorKind::kUsage, what);
}

[[noreturn]] inline void
throwInternal(const std::string& what)
{
  throw Error(ErrorKind::kInternal, what);
}

}  // namespace spc
