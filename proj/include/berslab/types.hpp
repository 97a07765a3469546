#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace berslab {

using Complex = std::complex<double>;

inline constexpr Complex I{0.0, 1.0};

// Base of every library error; carries a short machine-readable code such as
// "angle_range" or "near_pole" next to the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Invalid user input (polygon data, grids, parameters). The CLI maps this to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numerical failure: non-convergent quadrature, step-size underflow, etc.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace berslab
