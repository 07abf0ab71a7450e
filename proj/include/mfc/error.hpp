#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfc {

enum class Errc {
  sequencing,         // non-monotone sample time
  spacing,            // irregular sample spacing
  insufficient_data,  // estimator window not yet full
  realization,        // improper transfer function
  pole_at_origin,     // dc gain undefined
  configuration,      // invalid scenario or parameter
  divergence,         // closed loop blew up
  io,                 // unreadable / unwritable file
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the closed-loop runner when the state leaves the finite range.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, double time, const std::string& what)
      : Error(Errc::divergence, what), step_(step), time_(time) {}

  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t step_;
  double time_;
};

inline Error config_error(const std::string& what) { return Error(Errc::configuration, what); }

}  // namespace mfc
