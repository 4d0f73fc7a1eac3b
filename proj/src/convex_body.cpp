#include "osb/convex_body.hpp"

#include "osb/rng.hpp"

#include <algorithm>
#include <cmath>

namespace osb {

namespace {

void check_dim(const ConvexBody& body, const Vector& v, const char* who) {
    if (v.size() != body.dim)
        throw InvalidInput(std::string(who) + ": expected dimension " +
                           std::to_string(body.dim) + ", got " + std::to_string(v.size()));
}

}  // namespace

double gauge(const ConvexBody& body, const Vector& v) {
    check_dim(body, v, "gauge");
    if (!v.allFinite()) throw InvalidInput("gauge: non-finite input");
    double g = body.gauge_fn(v);
    if (!std::isfinite(g) || g < 0)
        throw NumericFailure("gauge: evaluator returned invalid value", g, 0.0);
    return g;
}

Vector gauge_gradient(const ConvexBody& body, const Vector& x, const ToleranceConfig& tol) {
    check_dim(body, x, "gauge_gradient");
    if (!x.allFinite()) throw InvalidInput("gauge_gradient: non-finite input");
    const double norm = x.norm();
    if (norm == 0.0) throw SingularPoint("gauge_gradient: gradient undefined at the origin");
    if (body.gradient_fn) return body.gradient_fn(x);

    const double h = tol.fd_step * norm;
    Vector grad(body.dim);
    Vector xp = x, xm = x;
    for (int i = 0; i < body.dim; ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        grad[i] = (body.gauge_fn(xp) - body.gauge_fn(xm)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return grad;
}

Matrix gauge_hessian(const ConvexBody& body, const Vector& x, const ToleranceConfig& tol) {
    check_dim(body, x, "gauge_hessian");
    const double norm = x.norm();
    if (norm == 0.0) throw SingularPoint("gauge_hessian: undefined at the origin");
    if (body.hessian_fn) return body.hessian_fn(x);

    // central stencil on the gradient, step 1e-4 |x|
    const double h = 1e-4 * norm;
    Matrix hess(body.dim, body.dim);
    Vector xp = x, xm = x;
    for (int i = 0; i < body.dim; ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        hess.col(i) = (gauge_gradient(body, xp, tol) - gauge_gradient(body, xm, tol)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return 0.5 * (hess + hess.transpose());
}

BoundaryPoint boundary_project(const ConvexBody& body, const Vector& v, const ToleranceConfig& tol) {
    check_dim(body, v, "boundary_project");
    if (!v.allFinite() || v.norm() == 0.0)
        throw InvalidInput("boundary_project: need a finite nonzero vector");
    const double g = gauge(body, v);
    if (g <= 0.0)
        throw InvalidInput("boundary_project: gauge vanished on a nonzero vector");
    BoundaryPoint bp;
    bp.x = v / g;
    bp.grad = gauge_gradient(body, bp.x, tol);
    const double gn = bp.grad.norm();
    if (gn == 0.0) throw NumericFailure("boundary_project: zero gradient on the boundary", 0.0, 0.0);
    bp.normal = bp.grad / gn;
    return bp;
}

SupportPoint support_point(const ConvexBody& body, const Vector& u, const ToleranceConfig& tol) {
    check_dim(body, u, "support_point");
    const double unorm = u.norm();
    if (!u.allFinite() || unorm == 0.0)
        throw InvalidInput("support_point: need a finite nonzero direction");

    const int d = body.dim;
    const double res_scale = std::max(1.0, unorm);

    // Damped Newton on the stationarity system u = lambda grad G(x), G(x) = 1.
    // For a strictly convex body any stationary point with lambda > 0 is the
    // unique maximizer of <x, u> on the boundary.
    auto residual = [&](const Vector& x, double lambda, Vector& out) {
        Vector grad = gauge_gradient(body, x, tol);
        out.resize(d + 1);
        out.head(d) = u - lambda * grad;
        out[d] = body.gauge_fn(x) - 1.0;
        return grad;
    };

    auto run_newton = [&](Vector x, SupportPoint& best) {
        double g0 = body.gauge_fn(x);
        if (!(g0 > 0)) return false;
        x /= g0;
        Vector grad = gauge_gradient(body, x, tol);
        double lambda = u.dot(x);
        if (lambda <= 0) lambda = unorm;

        Vector F(d + 1), F_new(d + 1);
        grad = residual(x, lambda, F);
        for (int it = 0; it < tol.newton_max_iter; ++it) {
            double rn = F.norm();
            if (rn <= tol.newton_tol * res_scale) {
                if (lambda <= 0) return false;  // converged to the minimizer
                double value = u.dot(x);
                if (value > best.value) {
                    best.value = value;
                    best.maximizer = x;
                    best.residual = rn;
                    best.iterations = it;
                }
                return true;
            }
            Matrix Jm(d + 1, d + 1);
            Jm.topLeftCorner(d, d) = -lambda * gauge_hessian(body, x, tol);
            Jm.topRightCorner(d, 1) = -grad;
            Jm.bottomLeftCorner(1, d) = grad.transpose();
            Jm(d, d) = 0.0;
            Eigen::PartialPivLU<Matrix> lu(Jm);
            Vector step = lu.solve(-F);
            if (!step.allFinite()) return false;

            double damp = 1.0;
            bool accepted = false;
            for (int k = 0; k < 30; ++k) {
                Vector x_new = x + damp * step.head(d);
                double l_new = lambda + damp * step[d];
                if (x_new.norm() > 1e-12) {
                    Vector grad_new = residual(x_new, l_new, F_new);
                    if (F_new.allFinite() && F_new.norm() < rn) {
                        x = x_new;
                        lambda = l_new;
                        F = F_new;
                        grad = grad_new;
                        accepted = true;
                        break;
                    }
                }
                damp *= 0.5;
            }
            if (!accepted) return false;
        }
        return false;
    };

    SupportPoint best;
    best.value = -1.0;

    // starts: u itself plus the sign-matched coordinate directions
    std::vector<Vector> starts;
    starts.push_back(u);
    for (int i = 0; i < d; ++i) {
        Vector e = Vector::Zero(d);
        e[i] = (u[i] >= 0.0) ? 1.0 : -1.0;
        starts.push_back(e);
    }
    for (const Vector& s : starts) {
        if (run_newton(s, best) && best.residual <= tol.newton_tol * res_scale) return best;
    }
    // last resort: a few deterministic perturbed starts
    Rng rng(0x5eedull);
    for (int k = 0; k < 8; ++k) {
        Vector s = u / unorm + 0.5 * rng.direction(d);
        if (s.norm() > 1e-9 && run_newton(s, best) &&
            best.residual <= tol.newton_tol * res_scale)
            return best;
    }
    if (best.value < 0)
        throw NumericFailure("support_point: no start converged", best.value, -1.0);
    if (best.residual > tol.newton_tol * res_scale)
        throw NumericFailure("support_point: best residual above tolerance", best.value,
                             best.residual);
    return best;
}

double support(const ConvexBody& body, const Vector& u, const ToleranceConfig& tol) {
    check_dim(body, u, "support");
    if (!u.allFinite() || u.norm() == 0.0)
        throw InvalidInput("support: need a finite nonzero direction");
    if (body.support_fn) return body.support_fn(u);
    return support_point(body, u, tol).value;
}

ConvexityReport convexity_probe(const ConvexBody& body, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InvalidInput("convexity_probe: n_samples must be >= 1");
    Rng rng(seed);
    ConvexityReport report;
    report.n_samples = n_samples;
    for (int i = 0; i < n_samples; ++i) {
        Vector a = rng.uniform(0.2, 2.0) * rng.direction(body.dim);
        Vector b = rng.uniform(0.2, 2.0) * rng.direction(body.dim);
        double lam = rng.uniform(0.05, 0.95);
        double lhs = body.gauge_fn(lam * a + (1.0 - lam) * b);
        double rhs = lam * body.gauge_fn(a) + (1.0 - lam) * body.gauge_fn(b);
        report.max_violation = std::max(report.max_violation, lhs - rhs);
    }
    return report;
}

std::vector<BoundaryPoint> sample_boundary(const ConvexBody& body, int n, std::uint64_t seed,
                                           const ToleranceConfig& tol) {
    Rng rng(seed);
    std::vector<BoundaryPoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(boundary_project(body, rng.direction(body.dim), tol));
    return out;
}

}  // namespace osb
