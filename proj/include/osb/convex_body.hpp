#ifndef OSB_CONVEX_BODY_HPP
#define OSB_CONVEX_BODY_HPP

#include "osb/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace osb {

/// A centrally symmetric convex body given by evaluator bundles. The gauge
/// (Minkowski functional) is the primary description: G is positively
/// 1-homogeneous, even, convex, and equals 1 exactly on the boundary.
/// Evaluators are pure; a realized body is immutable and freely shareable
/// across threads.
struct ConvexBody {
    int dim = 0;
    Smoothness smoothness = Smoothness::Cinf;
    bool numeric = false;        // evaluators contain inner numeric solves
    bool ellipsoidal = false;    // gauge^2 is a positive definite quadratic form
    bool self_polar_validated = false;  // set by factories after a passed gate
    std::string label;

    std::function<double(const Vector&)> gauge_fn;
    std::function<Vector(const Vector&)> gradient_fn;  // optional analytic gradient
    std::function<Matrix(const Vector&)> hessian_fn;   // optional analytic Hessian
    std::function<double(const Vector&)> support_fn;   // optional analytic support

    Matrix quad_form;  // gauge^2 = v^T Q v when ellipsoidal, else empty

    bool has_gradient() const { return static_cast<bool>(gradient_fn); }
    bool has_hessian() const { return static_cast<bool>(hessian_fn); }
    bool has_support() const { return static_cast<bool>(support_fn); }
};

/// Default tolerances for a body: analytic evaluators warrant tighter
/// identity checks than numeric-polar ones.
inline ToleranceConfig default_tolerances(const ConvexBody& body) {
    return body.numeric ? ToleranceConfig::numeric() : ToleranceConfig::analytic();
}

/// A point on the unit level set of the gauge with cached derivatives.
/// `fvec` is the characteristic vector J grad; the symplectic module fills it.
struct BoundaryPoint {
    Vector x;
    Vector grad;
    Vector normal;
    Vector fvec;

    bool has_fvec() const { return fvec.size() > 0; }
};

struct ConvexityReport {
    double max_violation = 0.0;  // max of G(la+(1-l)b) - lG(a) - (1-l)G(b)
    int n_samples = 0;
};

struct SupportPoint {
    double value = 0.0;   // h_X(u)
    Vector maximizer;     // boundary point attaining the maximum
    double residual = 0.0;
    int iterations = 0;
};

double gauge(const ConvexBody& body, const Vector& v);

/// Analytic gradient when available, otherwise central differences with a
/// step scaled by |x|. Errors at the origin.
Vector gauge_gradient(const ConvexBody& body, const Vector& x,
                      const ToleranceConfig& tol = {});

/// Analytic Hessian when available, otherwise a central stencil applied to
/// the gradient with step 1e-4 |x|, symmetrized.
Matrix gauge_hessian(const ConvexBody& body, const Vector& x,
                     const ToleranceConfig& tol = {});

/// Radial normalization v -> v / G(v); the result has gauge exactly 1 and
/// carries the cached gradient and unit normal.
BoundaryPoint boundary_project(const ConvexBody& body, const Vector& v,
                               const ToleranceConfig& tol = {});

/// Support function h_X(u) = max_{x in X} <x,u>. Uses the analytic shortcut
/// if the body carries one, otherwise maximizes over the boundary.
double support(const ConvexBody& body, const Vector& u,
               const ToleranceConfig& tol = {});

/// Numeric support maximization (always runs the solver; ignores the
/// analytic shortcut). Multistart ascent over directions followed by a
/// Newton polish; returns value and maximizer.
SupportPoint support_point(const ConvexBody& body, const Vector& u,
                           const ToleranceConfig& tol = {});

/// Samples random pairs and segment parameters, reporting the worst convexity
/// violation. A valid body stays below eq_tol (numerical noise only).
ConvexityReport convexity_probe(const ConvexBody& body, int n_samples,
                                std::uint64_t seed);

/// Random boundary points from normalized Gaussian directions (deterministic
/// in the seed).
std::vector<BoundaryPoint> sample_boundary(const ConvexBody& body, int n,
                                           std::uint64_t seed,
                                           const ToleranceConfig& tol = {});

}  // namespace osb

#endif
