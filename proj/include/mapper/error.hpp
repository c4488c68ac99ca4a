#pragma once

#include <stdexcept>
#include <string>

namespace mapper {

/// Bad input data: unparsable tables, empty results, singular designs.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is out of range or inconsistent.
/// `field()` names the offending parameter so HTTP and CLI front ends can
/// point at it.
class ParamError : public std::invalid_argument {
public:
  ParamError(std::string field, const std::string &message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A computation was superseded before it finished.
class Cancelled : public std::runtime_error {
public:
  Cancelled() : std::runtime_error("computation cancelled") {}
};

} // namespace mapper
