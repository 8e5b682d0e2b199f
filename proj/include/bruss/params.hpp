#pragma once

#include <cmath>
#include <stdexcept>

namespace bruss {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct SingularTransform : Error {
    using Error::Error;
};
struct UndefinedRate : Error {
    using Error::Error;
};
struct NoCrossing : Error {
    using Error::Error;
};
struct MaxStepsExceeded : Error {
    using Error::Error;
};
struct NotConverged : Error {
    using Error::Error;
};
struct OrderingViolation : Error {
    using Error::Error;
};
struct ConstraintViolation : Error {
    using Error::Error;
};

/// Model constants. b = a/epsilon is the bifurcation parameter; the
/// oscillatory regime requires b > b_crit = 1 + a^2.
struct Params {
    double a = 0.5;
    double epsilon = 0.1;

    double b() const {
        if (epsilon <= 0.0)
            throw DomainError("Params::b undefined at epsilon <= 0");
        return a / epsilon;
    }
    double b_crit() const { return 1.0 + a * a; }
    double sqrt_eps() const { return std::sqrt(epsilon); }

    double theta_star() const { return std::atan(2.0); }
    double r_star() const { return 1.0 / std::sqrt(5.0 * a); }
    double rho_star() const { return 1.0 / (2.0 * std::sqrt(a)); }
    // r-coordinate of the drop point Q on S^1
    double q_radius() const { return 1.0 / (2.0 * std::sqrt(2.0 * a)); }

    void validate() const {
        if (!(a > 0.0)) throw DomainError("Params: a must be positive");
        if (!(epsilon >= 0.0)) throw DomainError("Params: epsilon must be nonnegative");
    }
    bool oscillatory() const { return epsilon > 0.0 && b() > b_crit(); }
};

} // namespace bruss
