#ifndef OSB_SYMPLECTIC_HPP
#define OSB_SYMPLECTIC_HPP

#include "osb/convex_body.hpp"
#include "osb/types.hpp"

#include <cstdint>
#include <vector>

namespace osb {

// Fixed convention throughout: coordinates (x_1..x_n, y_1..y_n),
// J(x, y) = (-y, x), omega(u, v) = <Ju, v>, so omega(e_i, e_{n+i}) = 1.
// With it f(x) = J grad G(x) satisfies omega(x, f(x)) = <x, grad G> = 1 on
// the boundary by the Euler identity.

inline int half_dim(int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw InvalidInput("dimension must be even and >= 2, got " + std::to_string(dim));
    return dim / 2;
}

template <typename Derived>
Vector apply_J(const Eigen::MatrixBase<Derived>& v) {
    const int n = half_dim(static_cast<int>(v.size()));
    Vector out(2 * n);
    out.head(n) = -v.tail(n);
    out.tail(n) = v.head(n);
    return out;
}

template <typename DerivedA, typename DerivedB>
double omega(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
    if (u.size() != v.size())
        throw InvalidInput("omega: dimension mismatch");
    const int n = half_dim(static_cast<int>(u.size()));
    return u.head(n).dot(v.tail(n)) - u.tail(n).dot(v.head(n));
}

/// The characteristic vector f(x) = J grad G(x): the unique vector spanning
/// the characteristic line ker omega|_{T_x dX} with omega(x, f(x)) = 1.
Vector char_map(const ConvexBody& body, const BoundaryPoint& x,
                const ToleranceConfig& tol = {});

/// boundary_project plus the cached characteristic vector.
BoundaryPoint char_boundary_point(const ConvexBody& body, const Vector& v,
                                  const ToleranceConfig& tol = {});

struct InvolutionCheck {
    double defect = 0.0;        // |f(f(x)) + x|
    double gauge_defect = 0.0;  // |G(f(x)) - 1|; nonzero flags a non-self-polar body
};

/// f(f(x)) should equal -x on a self-polar body. Reports the deviation, and
/// the gauge defect of f(x) when that point misses the boundary.
InvolutionCheck check_involution(const ConvexBody& body, const BoundaryPoint& x,
                                 const ToleranceConfig& tol = {});

/// Directional derivative of f along a tangent vector, via J Hess G(x) xi.
/// Requires a C2 body; refuses C1 rather than return noise.
Vector char_map_derivative(const ConvexBody& body, const BoundaryPoint& x,
                           const Vector& xi, const ToleranceConfig& tol = {});

/// min over random (boundary point, unit tangent) pairs of omega(xi, D_xi f);
/// positive on every C2 self-polar body (positive curvature).
double positivity_scan(const ConvexBody& body, int n_samples, std::uint64_t seed,
                       const ToleranceConfig& tol = {});

/// Gauge of the symplectic polar X^w = JX°, computed as h_X(-Jy).
double symplectic_polar_gauge(const ConvexBody& body, const Vector& y,
                              const ToleranceConfig& tol = {});

struct SelfPolarityReport {
    double max_gauge_defect = 0.0;   // max |gauge_{X^w}(x) - 1| over boundary samples
    double alpha = 1.0;              // mean of 1 / ||f(x)||_X
    double max_fnorm_spread = 0.0;   // max |  ||f(x)||_X - mean  |
    int n_samples = 0;
};

/// Executable detector behind the constancy criterion: on a self-polar body
/// the symplectic-polar gauge is 1 on the boundary and ||f||_X is constant.
SelfPolarityReport self_polarity_defect(const ConvexBody& body, int n_samples,
                                        std::uint64_t seed,
                                        const ToleranceConfig& tol = {});

struct CharFlowTrace {
    std::vector<double> times;
    std::vector<Vector> points;       // on the boundary, G = 1 +- eq_tol
    std::string method = "RK4+reproject";
    double max_gauge_drift = 0.0;     // worst |G - 1| before reprojection
};

/// Integrates xdot = f(x) by RK4 with radial reprojection to the boundary
/// each step. Level-set fidelity over short horizons is the point; rejects
/// a step if reprojection moves the point by more than 1e-3.
CharFlowTrace char_flow(const ConvexBody& body, const BoundaryPoint& x0,
                        double t_max, int steps, const ToleranceConfig& tol = {});

}  // namespace osb

#endif
