#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wkbtd {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid or inconsistent configuration; carries one entry per offending path.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> items);
  const std::vector<std::string>& items() const noexcept { return items_; }
  const char* kind() const noexcept override { return "config"; }

 private:
  std::vector<std::string> items_;
};

/// Point outside the classically allowed region, empty window, turning point.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// Evaluation outside the sample range of a tabulated quantity.
class RangeError : public DomainError {
 public:
  using DomainError::DomainError;
  const char* kind() const noexcept override { return "range"; }
};

/// A backward characteristic leaves the region where its data are known.
class HorizonError : public DomainError {
 public:
  HorizonError(const std::string& what, double seed_x, double seed_t,
               double suggested_t_hi)
      : DomainError(what),
        seed_x_(seed_x),
        seed_t_(seed_t),
        suggested_t_hi_(suggested_t_hi) {}
  double seed_x() const noexcept { return seed_x_; }
  double seed_t() const noexcept { return seed_t_; }
  double suggested_t_hi() const noexcept { return suggested_t_hi_; }
  const char* kind() const noexcept override { return "horizon"; }

 private:
  double seed_x_;
  double seed_t_;
  double suggested_t_hi_;
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

/// Fields that should share a grid do not.
class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

/// The grid does not resolve the e^{iS/hbar} oscillation.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, long suggested_nx)
      : Error(what), suggested_nx_(suggested_nx) {}
  long suggested_nx() const noexcept { return suggested_nx_; }
  const char* kind() const noexcept override { return "resolution"; }

 private:
  long suggested_nx_;
};

/// A precondition that ties two inputs together does not hold.
class ConsistencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "consistency"; }
};

/// Consecutive loop states are too close to orthogonal.
class UndersamplingError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undersampling"; }
};

/// A measured quantity exceeded its configured tolerance.
class ToleranceFailure : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "tolerance"; }
};

}  // namespace wkbtd
