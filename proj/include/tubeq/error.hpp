#pragma once

#include <stdexcept>
#include <string>

namespace tubeq {

// Every failure raised by the library names the module/operation it came
// from, e.g. "frames.build_frames", so front ends can report it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// A caller-supplied value is out of range. `index` is the position of the
// offending entry in the parameter list it came from, or -1.
class ParameterError : public Error {
 public:
  ParameterError(std::string where, const std::string& what, int index = -1)
      : Error(std::move(where), what), index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

}  // namespace tubeq
