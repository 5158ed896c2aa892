#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace metriclab {

// Bad inputs or parameters outside an operation's domain. The CLI maps these
// to exit status 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A construction finished but one of its certified inequalities failed. The
// CLI maps these to exit status 2.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public DomainError {
 public:
  using DomainError::DomainError;
};

class CapExceeded : public DomainError {
 public:
  CapExceeded(const std::string& what, std::size_t requested, std::size_t cap)
      : DomainError(what + ": " + std::to_string(requested) + " exceeds cap " +
                    std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

class ExactModeSizeExceeded : public CapExceeded {
 public:
  using CapExceeded::CapExceeded;
};

class DepthOverflow : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotUltrametric : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotNested : public DomainError {
 public:
  NotNested(std::size_t level, const std::string& detail)
      : DomainError("level " + std::to_string(level) +
                    " does not refine its predecessor: " + detail),
        level_(level) {}

  std::size_t level() const noexcept { return level_; }

 private:
  std::size_t level_;
};

class NotSeparating : public DomainError {
 public:
  NotSeparating(std::size_t i, std::size_t j)
      : DomainError("points " + std::to_string(i) + " and " + std::to_string(j) +
                    " share a block of the deepest level"),
        pair_{i, j} {}

  std::array<std::size_t, 2> pair() const noexcept { return pair_; }

 private:
  std::array<std::size_t, 2> pair_;
};

class EmptyWindow : public DomainError {
 public:
  using DomainError::DomainError;
};

class ParseError : public DomainError {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& detail)
      : DomainError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                    ": " + detail),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class PackingInfeasible : public DomainError {
 public:
  PackingInfeasible(std::size_t level, double required, double capacity)
      : DomainError("packing infeasible at level " + std::to_string(level) + ": " +
                    std::to_string(required) + " boxes required, capacity " +
                    std::to_string(capacity)),
        level_(level),
        required_(required),
        capacity_(capacity) {}

  std::size_t level() const noexcept { return level_; }
  double required() const noexcept { return required_; }
  double capacity() const noexcept { return capacity_; }

 private:
  std::size_t level_;
  double required_;
  double capacity_;
};

// Carries the offending pair so callers can point at it in reports.
class PairViolation : public VerificationError {
 public:
  PairViolation(const std::string& what, std::size_t i, std::size_t j, double slack)
      : VerificationError(what + " at pair (" + std::to_string(i) + ", " +
                          std::to_string(j) + "), slack " + std::to_string(slack)),
        pair_{i, j},
        slack_(slack) {}

  std::array<std::size_t, 2> pair() const noexcept { return pair_; }
  double slack() const noexcept { return slack_; }

 private:
  std::array<std::size_t, 2> pair_;
  double slack_;
};

class CertificateViolated : public PairViolation {
 public:
  using PairViolation::PairViolation;
};

class DistortionBoundsViolated : public PairViolation {
 public:
  using PairViolation::PairViolation;
};

class BoundViolated : public PairViolation {
 public:
  BoundViolated(const std::string& what, std::size_t i, std::size_t j, std::size_t level,
                double slack)
      : PairViolation(what + " (level " + std::to_string(level) + ")", i, j, slack),
        level_(level) {}

  std::size_t level() const noexcept { return level_; }

 private:
  std::size_t level_;
};

}  // namespace metriclab
