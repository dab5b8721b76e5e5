#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mfres {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Working precision or truncation is insufficient for the requested accuracy.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coefficient table does not reach far enough.
class TableExhausted : public std::runtime_error {
 public:
  TableExhausted(const std::string& what, std::int64_t needed)
      : std::runtime_error(what + " (needs primes up to " + std::to_string(needed) + ")"),
        needed_(needed) {}
  std::int64_t needed() const noexcept { return needed_; }

 private:
  std::int64_t needed_;
};

/// A self-checking construction failed its own validation.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The coefficient cache is unreadable, unwritable, locked or corrupted.
class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfres
