#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prunelab {

using Index = std::int64_t;

/// Thrown when a value fails a contract check (shapes, ranges, parse errors).
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when an object is used outside its valid lifecycle (e.g. a consumed tape).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace prunelab
