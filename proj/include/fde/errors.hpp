#pragma once

#include <stdexcept>
#include <string>

namespace fde {

// Exponent outside the admissible window of the envelope map.
struct InfeasibleExponentError : std::domain_error {
    explicit InfeasibleExponentError(const std::string& what) : std::domain_error(what) {}
};

// Integrand hits a zero/singularity inside the integration range.
struct SingularIntegrandError : std::domain_error {
    explicit SingularIntegrandError(const std::string& what) : std::domain_error(what) {}
};

// Iteration produced a non-finite value or otherwise broke down.
struct NumericalFailureError : std::runtime_error {
    explicit NumericalFailureError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fde
