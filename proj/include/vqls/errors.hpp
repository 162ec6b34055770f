#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vqls {

// Error hierarchy. Everything the library throws derives from vqls::Error so
// callers (the CLI in particular) can map categories onto exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SizeError : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

/// A|x> is numerically null, so the normalized costs are undefined.
class DegenerateStateError : public Error {
  public:
    using Error::Error;
};

class SingularityError : public Error {
  public:
    using Error::Error;
};

class NumericalFailure : public Error {
  public:
    NumericalFailure(const std::string &what, std::size_t iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

  private:
    std::size_t iteration_;
};

class UsageError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace vqls
