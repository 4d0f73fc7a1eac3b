#ifndef OSB_TYPES_HPP
#define OSB_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace osb {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

enum class Smoothness { C1, C2, Cinf };

inline const char* to_string(Smoothness s) {
    switch (s) {
        case Smoothness::C1: return "C1";
        case Smoothness::C2: return "C2";
        default: return "Cinf";
    }
}

// Error taxonomy; the CLI maps these onto exit codes 2/3/4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments, malformed specs, preconditions violated by the caller.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Gradient requested at the gauge's singular point (the origin).
class SingularPoint : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// A derivative-based operation was asked of a body whose smoothness tag
// does not support it.
class SmoothnessError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// A mathematical gate failed: a body flunked its self-polarity check, or a
// construction was rejected by its validation suite. Carries the metric.
class GateFailure : public Error {
public:
    GateFailure(const std::string& what, std::string metric, double value)
        : Error(what), metric(std::move(metric)), value(value) {}
    std::string metric;
    double value;
};

// An iterative solver failed to converge; carries the best it found.
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, double best_value, double residual)
        : Error(what), best_value(best_value), residual(residual) {}
    double best_value;
    double residual;
};

struct ToleranceConfig {
    double eq_tol = 1e-9;        // identity checks (1e-6 for numeric-polar bodies)
    double newton_tol = 1e-12;   // residual norm for tangency/support solves
    int newton_max_iter = 50;
    double fd_step = 1e-6;       // relative central-difference step

    void validate() const {
        if (!(eq_tol > 0) || !(newton_tol > 0) || newton_max_iter <= 0 || !(fd_step > 0))
            throw InvalidInput("ToleranceConfig: all fields must be positive");
    }

    static ToleranceConfig analytic() { return {}; }
    static ToleranceConfig numeric() {
        ToleranceConfig t;
        t.eq_tol = 1e-6;
        return t;
    }
};

}  // namespace osb

#endif
