#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace critset {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// complex
struct ClosureError : Error { using Error::Error; };
struct MonotonicityError : Error { using Error::Error; };
struct EmptyInputError : Error { using Error::Error; };
struct InvalidFieldError : Error { using Error::Error; };
struct NotFoundError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// reduction
struct DimensionError : Error { using Error::Error; };

// bigstep
struct WrongSimplexClassError : Error { using Error::Error; };
struct DirectionError : Error { using Error::Error; };
struct AmbiguityError : Error { using Error::Error; };

// optimize
struct NumericalError : Error {
  NumericalError(std::size_t step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step(step) {}
  std::size_t step;
};

}  // namespace critset
