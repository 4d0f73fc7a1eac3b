#include "osb/symplectic.hpp"

#include "osb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace osb {

namespace {

void require_c2(const ConvexBody& body, const char* who) {
    if (body.smoothness == Smoothness::C1)
        throw SmoothnessError(std::string(who) + ": body '" + body.label +
                              "' is only C1; derivative-based operation refused");
}

}  // namespace

Vector char_map(const ConvexBody& body, const BoundaryPoint& x, const ToleranceConfig& tol) {
    if (x.has_fvec()) return x.fvec;
    Vector grad = x.grad.size() > 0 ? x.grad : gauge_gradient(body, x.x, tol);
    if (grad.norm() == 0.0)
        throw NumericFailure("char_map: degenerate boundary point (zero gradient)", 0.0, 0.0);
    return apply_J(grad);
}

BoundaryPoint char_boundary_point(const ConvexBody& body, const Vector& v,
                                  const ToleranceConfig& tol) {
    BoundaryPoint bp = boundary_project(body, v, tol);
    bp.fvec = apply_J(bp.grad);
    return bp;
}

InvolutionCheck check_involution(const ConvexBody& body, const BoundaryPoint& x,
                                 const ToleranceConfig& tol) {
    Vector f1 = char_map(body, x, tol);
    InvolutionCheck out;
    out.gauge_defect = std::abs(gauge(body, f1) - 1.0);
    // grad G is 0-homogeneous, so evaluating f at f1 without reprojection is
    // exact for the extension and keeps the defect honest.
    Vector f2 = apply_J(gauge_gradient(body, f1, tol));
    out.defect = (f2 + x.x).norm();
    return out;
}

Vector char_map_derivative(const ConvexBody& body, const BoundaryPoint& x, const Vector& xi,
                           const ToleranceConfig& tol) {
    require_c2(body, "char_map_derivative");
    if (xi.size() != body.dim) throw InvalidInput("char_map_derivative: dimension mismatch");
    const double tangency = std::abs(x.grad.dot(xi));
    if (tangency > 1e-7 * std::max(1.0, xi.norm()) * std::max(1.0, x.grad.norm()))
        throw InvalidInput("char_map_derivative: xi is not tangent (|<grad, xi>| = " +
                           std::to_string(tangency) + ")");
    return apply_J(Matrix(gauge_hessian(body, x.x, tol)) * xi);
}

double positivity_scan(const ConvexBody& body, int n_samples, std::uint64_t seed,
                       const ToleranceConfig& tol) {
    require_c2(body, "positivity_scan");
    Rng rng(seed);
    double min_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_samples; ++i) {
        BoundaryPoint bp = boundary_project(body, rng.direction(body.dim), tol);
        Vector xi = rng.direction(body.dim);
        xi -= (xi.dot(bp.grad) / bp.grad.squaredNorm()) * bp.grad;
        double n = xi.norm();
        if (n < 1e-8) {
            --i;
            continue;
        }
        xi /= n;
        min_value = std::min(min_value, omega(xi, char_map_derivative(body, bp, xi, tol)));
    }
    return min_value;
}

double symplectic_polar_gauge(const ConvexBody& body, const Vector& y,
                              const ToleranceConfig& tol) {
    if (y.size() != body.dim) throw InvalidInput("symplectic_polar_gauge: dimension mismatch");
    if (y.norm() == 0.0) return 0.0;
    return support(body, -apply_J(y), tol);
}

SelfPolarityReport self_polarity_defect(const ConvexBody& body, int n_samples,
                                        std::uint64_t seed, const ToleranceConfig& tol) {
    SelfPolarityReport report;
    report.n_samples = n_samples;
    std::vector<double> fnorms;
    fnorms.reserve(n_samples);
    Rng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        BoundaryPoint bp = boundary_project(body, rng.direction(body.dim), tol);
        double pg = symplectic_polar_gauge(body, bp.x, tol);
        report.max_gauge_defect = std::max(report.max_gauge_defect, std::abs(pg - 1.0));
        fnorms.push_back(gauge(body, char_map(body, bp, tol)));
    }
    double mean = 0.0;
    for (double f : fnorms) mean += f;
    mean /= double(fnorms.size());
    report.alpha = 1.0 / mean;
    for (double f : fnorms)
        report.max_fnorm_spread = std::max(report.max_fnorm_spread, std::abs(f - mean));
    return report;
}

CharFlowTrace char_flow(const ConvexBody& body, const BoundaryPoint& x0, double t_max,
                        int steps, const ToleranceConfig& tol) {
    require_c2(body, "char_flow");
    if (steps < 1) throw InvalidInput("char_flow: steps must be >= 1");
    // f extended 0-homogeneously off the boundary; RK4 stages may leave the
    // level set slightly, the radial reprojection pulls each step back.
    auto field = [&](const Vector& p) { return apply_J(gauge_gradient(body, p, tol)); };

    CharFlowTrace trace;
    trace.times.reserve(steps + 1);
    trace.points.reserve(steps + 1);
    Vector x = x0.x;
    const double h = t_max / steps;
    trace.times.push_back(0.0);
    trace.points.push_back(x);
    for (int k = 0; k < steps; ++k) {
        Vector k1 = field(x);
        Vector k2 = field(x + 0.5 * h * k1);
        Vector k3 = field(x + 0.5 * h * k2);
        Vector k4 = field(x + h * k3);
        Vector x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        double g = gauge(body, x_new);
        trace.max_gauge_drift = std::max(trace.max_gauge_drift, std::abs(g - 1.0));
        Vector reprojected = x_new / g;
        double moved = (reprojected - x_new).norm();
        if (moved > 1e-3)
            throw NumericFailure("char_flow: reprojection moved a point by " +
                                     std::to_string(moved) + "; step too large",
                                 moved, g - 1.0);
        x = reprojected;
        trace.times.push_back((k + 1) * h);
        trace.points.push_back(x);
    }
    return trace;
}

}  // namespace osb
