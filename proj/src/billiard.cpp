#include "osb/billiard.hpp"

#include "osb/rng.hpp"
#include "osb/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace osb {

namespace {

// Ambient Jacobian of f = J grad G (the 0-homogeneous extension). Uses the
// Hessian whenever the body carries one (even C1-tagged bodies: near their
// curvature blow-ups the analytic value is the only usable slope); otherwise
// C2 bodies get an FD Hessian and C1 bodies central differences of f itself
// with step 1e-5 |x|.
Matrix char_map_jacobian(const ConvexBody& body, const Vector& x, const ToleranceConfig& tol) {
    const int d = body.dim;
    if (body.has_hessian() || body.smoothness != Smoothness::C1) {
        Matrix H = gauge_hessian(body, x, tol);
        const int n = d / 2;
        Matrix JH(d, d);
        JH.topRows(n) = -H.bottomRows(n);
        JH.bottomRows(n) = H.topRows(n);
        return JH;
    }
    const double h = 1e-5 * x.norm();
    Matrix Df(d, d);
    Vector xp = x, xm = x;
    for (int i = 0; i < d; ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        Df.col(i) = (apply_J(gauge_gradient(body, xp, tol)) -
                     apply_J(gauge_gradient(body, xm, tol))) /
                    (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return Df;
}

std::uint64_t hash_vector(const Vector& z) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (int i = 0; i < z.size(); ++i) {
        std::uint64_t bits;
        double v = z[i];
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

struct NewtonResult {
    bool ok = false;
    Vector x;
    double t = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// Damped Newton on F(x,t) = [x - sigma t f(x) - z; G(x) - 1].
NewtonResult newton_tangency(const ConvexBody& body, const Vector& z, double sigma,
                             Vector x, double t, const ToleranceConfig& tol) {
    const int d = body.dim;
    const double scale = std::max(1.0, z.norm());
    NewtonResult res;

    auto eval = [&](const Vector& xx, double tt, Vector& F, Vector& grad, Vector& f) {
        grad = gauge_gradient(body, xx, tol);
        f = apply_J(grad);
        F.resize(d + 1);
        F.head(d) = xx - sigma * tt * f - z;
        F[d] = gauge(body, xx) - 1.0;
    };

    // near curvature blow-ups of C1 bodies Newton converges only linearly;
    // scale the budget and bail out when progress stops instead
    const int budget =
        body.smoothness == Smoothness::C1 ? 8 * tol.newton_max_iter : tol.newton_max_iter;
    double stall_mark = std::numeric_limits<double>::infinity();
    Vector F, grad, f, F_new, grad_new, f_new;
    eval(x, t, F, grad, f);
    for (int it = 0; it < budget; ++it) {
        double rn = F.norm();
        if (it % 25 == 24) {
            if (rn > 0.9 * stall_mark) break;
            stall_mark = rn;
        }
        if (rn <= tol.newton_tol * scale) {
            res.ok = t > 1e-12;
            res.x = x;
            res.t = t;
            res.residual = rn;
            res.iterations = it;
            return res;
        }
        Matrix Jm(d + 1, d + 1);
        Jm.topLeftCorner(d, d) =
            Matrix::Identity(d, d) - sigma * t * char_map_jacobian(body, x, tol);
        Jm.topRightCorner(d, 1) = -sigma * f;
        Jm.bottomLeftCorner(1, d) = grad.transpose();
        Jm(d, d) = 0.0;

        auto try_step = [&](const Vector& step) {
            if (!step.allFinite()) return false;
            double damp = 1.0;
            for (int k = 0; k < 30; ++k) {
                Vector x_new = x + damp * step.head(d);
                double t_new = t + damp * step[d];
                if (x_new.norm() > 1e-12) {
                    eval(x_new, t_new, F_new, grad_new, f_new);
                    if (F_new.allFinite() && F_new.norm() < rn) {
                        x = x_new;
                        t = t_new;
                        F = F_new;
                        grad = grad_new;
                        f = f_new;
                        return true;
                    }
                }
                damp *= 0.5;
            }
            return false;
        };

        bool accepted = try_step(Eigen::PartialPivLU<Matrix>(Jm).solve(-F));
        if (!accepted) {
            // Levenberg fallback: on C1 bodies the finite-difference Jacobian
            // can be badly wrong near curvature blow-ups; regularized steps
            // creep through
            Matrix JtJ = Jm.transpose() * Jm;
            Vector JtF = Jm.transpose() * F;
            double base = JtJ.diagonal().maxCoeff();
            for (double lm = 1e-8; lm <= 1.0 && !accepted; lm *= 100.0) {
                Matrix A = JtJ + lm * base * Matrix::Identity(d + 1, d + 1);
                accepted = try_step(A.ldlt().solve(-JtF));
            }
        }
        if (!accepted) break;
        res.residual = F.norm();
    }
    res.x = x;
    res.t = t;
    return res;
}

// Guaranteed 2-D fallback: bisection in boundary angle on
// eta(theta) = cross(x(theta) - z, f(x(theta))), keeping the root with the
// requested orientation.
NewtonResult bisect_tangency_2d(const ConvexBody& body, const Vector& z, double sigma,
                                const ToleranceConfig& tol) {
    const int K = 2048;
    auto boundary = [&](double theta) {
        Vector v(2);
        v << std::cos(theta), std::sin(theta);
        return Vector(v / gauge(body, v));
    };
    auto eta = [&](double theta) {
        Vector x = boundary(theta);
        Vector f = apply_J(gauge_gradient(body, x, tol));
        return (x[0] - z[0]) * f[1] - (x[1] - z[1]) * f[0];
    };

    NewtonResult res;
    const double two_pi = 6.283185307179586476925286766559;
    double prev_theta = 0.0, prev = eta(0.0);
    for (int k = 1; k <= K; ++k) {
        double theta = two_pi * k / K;
        double cur = eta(theta);
        if ((prev < 0) != (cur < 0)) {
            double lo = prev_theta, hi = theta;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((eta(lo) < 0) != (eta(mid) < 0))
                    hi = mid;
                else
                    lo = mid;
            }
            Vector x = boundary(0.5 * (lo + hi));
            Vector f = apply_J(gauge_gradient(body, x, tol));
            double t = sigma * (x - z).dot(f) / f.squaredNorm();
            if (t > 0) {
                Vector F(3);
                F.head(2) = x - sigma * t * f - z;
                F[2] = gauge(body, x) - 1.0;
                double rn = F.norm();
                if (rn < res.residual) {
                    res.ok = true;
                    res.x = x;
                    res.t = t;
                    res.residual = rn;
                }
            }
        }
        prev_theta = theta;
        prev = cur;
    }
    return res;
}

}  // namespace

TangencySolution tangency_solve(const ConvexBody& body, const Vector& z, Orientation orient,
                                const ToleranceConfig& tol) {
    if (z.size() != body.dim) throw InvalidInput("tangency_solve: dimension mismatch");
    const double gz = gauge(body, z);
    if (gz <= 1.0 + 1e-9)
        throw InvalidInput("tangency_solve: point is on or inside the body (gauge " +
                           std::to_string(gz) + ")");
    const double sigma = orient == Orientation::Forward ? 1.0 : -1.0;
    const double scale = std::max(1.0, z.norm());

    BoundaryPoint radial = boundary_project(body, z, tol);
    Vector f0 = apply_J(radial.grad);
    const double t0 = (z - radial.x).norm() / f0.norm();

    // The forward tangency point sits downstream of the radial projection
    // along the characteristic direction; bias the start that way.
    auto biased_start = [&](double bias) {
        Vector v = radial.x + sigma * bias * std::min(1.5, t0) * f0 / f0.norm();
        return Vector(v / gauge(body, v));
    };
    // Circle-phase guess: exact for the disk (touch angle arccos(1/|z|)),
    // close for anything round.
    auto phase_start = [&]() {
        double alpha = std::acos(std::min(1.0, 1.0 / gz));
        Vector v = std::cos(alpha) * radial.x +
                   sigma * std::sin(alpha) * (radial.x.norm() / f0.norm()) * f0;
        return Vector(v / gauge(body, v));
    };

    NewtonResult best;
    auto better = [](const NewtonResult& a, const NewtonResult& b) {
        if (a.ok != b.ok) return a.ok;
        return a.residual < b.residual;
    };
    auto consider = [&](const Vector& x_init, double t_init) {
        NewtonResult r = newton_tangency(body, z, sigma, x_init, t_init, tol);
        if (better(r, best)) best = r;
        return best.ok && best.residual <= tol.newton_tol * scale;
    };

    bool done = consider(phase_start(), std::sqrt(std::max(gz * gz - 1.0, 0.25))) ||
                consider(biased_start(0.5), t0) || consider(radial.x, t0) ||
                consider(biased_start(1.0), t0);
    if (!done) {
        Rng rng(hash_vector(z) ^ (orient == Orientation::Forward ? 0x0f0f0f0f : 0xf0f0f0f0));
        for (int k = 0; k < 2 * body.dim + 1 && !done; ++k) {
            Vector xi = rng.direction(body.dim);
            xi -= (xi.dot(radial.grad) / radial.grad.squaredNorm()) * radial.grad;
            Vector v = radial.x + 0.3 * xi;
            done = consider(Vector(v / gauge(body, v)), t0 * rng.uniform(0.5, 1.5));
        }
    }
    if (!done && body.dim == 2) {
        NewtonResult r = bisect_tangency_2d(body, z, sigma, tol);
        // polish the bisection root with a few Newton steps
        if (r.ok) {
            NewtonResult p = newton_tangency(body, z, sigma, r.x, r.t, tol);
            best = (p.ok && p.residual <= r.residual) ? p : r;
            done = best.residual <= std::max(tol.newton_tol * scale, 1e-10);
        }
    }
    if (!done)
        throw NumericFailure("tangency_solve: no start converged for '" + body.label + "'",
                             best.t, best.residual);

    TangencySolution sol;
    sol.x.x = best.x;
    sol.x.grad = gauge_gradient(body, best.x, tol);
    sol.x.normal = sol.x.grad / sol.x.grad.norm();
    sol.x.fvec = apply_J(sol.x.grad);
    sol.t = best.t;
    sol.residual = best.residual;
    sol.iterations = best.iterations;
    return sol;
}

Vector outer_map(const ConvexBody& body, const Vector& z, const ToleranceConfig& tol) {
    TangencySolution s = tangency_solve(body, z, Orientation::Forward, tol);
    return Vector(2.0 * s.x.x - z);
}

Vector outer_map_inverse(const ConvexBody& body, const Vector& z, const ToleranceConfig& tol) {
    TangencySolution s = tangency_solve(body, z, Orientation::Backward, tol);
    return Vector(2.0 * s.x.x - z);
}

OrbitTrace iterate(const ConvexBody& body, const Vector& z0, int n_steps,
                   const ToleranceConfig& tol, bool inverse) {
    if (n_steps < 1) throw InvalidInput("iterate: need n_steps >= 1");
    if (gauge(body, z0) <= 1.0 + 1e-9)
        throw InvalidInput("iterate: start point is on or inside the body");
    OrbitTrace trace;
    trace.body_label = body.label;
    trace.points.reserve(n_steps + 1);
    trace.points.push_back(z0);
    Vector z = z0;
    const Orientation orient = inverse ? Orientation::Backward : Orientation::Forward;
    for (int k = 0; k < n_steps; ++k) {
        TangencySolution s;
        try {
            s = tangency_solve(body, z, orient, tol);
        } catch (const InvalidInput& e) {
            trace.truncated = true;
            trace.truncation_reason = std::string("step ") + std::to_string(k) + ": " + e.what();
            break;
        } catch (const NumericFailure& e) {
            trace.truncated = true;
            trace.truncation_reason = std::string("step ") + std::to_string(k) + ": " + e.what();
            break;
        }
        z = 2.0 * s.x.x - z;
        trace.points.push_back(z);
        trace.tangencies.push_back(std::move(s));
    }
    return trace;
}

std::array<Vector, 4> four_periodic_family(const ConvexBody& body, const BoundaryPoint& x,
                                           const ToleranceConfig& tol) {
    if (!body.self_polar_validated) {
        SelfPolarityReport rep = self_polarity_defect(body, 32, 0xa11ceull, tol);
        const double gate = body.numeric ? 1e-4 : 1e-6;
        if (rep.max_gauge_defect > gate)
            throw GateFailure("four_periodic_family: body '" + body.label +
                                  "' failed the self-polarity gate (defect " +
                                  std::to_string(rep.max_gauge_defect) + ")",
                              "self_polarity_defect", rep.max_gauge_defect);
    }
    Vector f = char_map(body, x, tol);
    return {Vector(x.x + f), Vector(-x.x + f), Vector(-x.x - f), Vector(x.x - f)};
}

FourPeriodicReport four_periodic_defects(const ConvexBody& body, const BoundaryPoint& x,
                                         const ToleranceConfig& tol) {
    FourPeriodicReport report;
    report.vertices = four_periodic_family(body, x, tol);
    const auto& z = report.vertices;
    for (int i = 0; i < 4; ++i)
        report.edge_defects[i] = (outer_map(body, z[i], tol) - z[(i + 1) % 4]).norm();
    report.symplectic_area = omega(Vector(z[1] - z[0]), Vector(z[3] - z[0]));
    report.symmetry_defect = (z[2] + z[0]).norm() + (z[3] + z[1]).norm();
    return report;
}

PeriodicityReport periodicity_defect(const OrbitTrace& trace, int period) {
    const int n = static_cast<int>(trace.points.size());
    if (period < 1 || n < period + 1)
        throw InvalidInput("periodicity_defect: trace shorter than the period");
    PeriodicityReport report;
    for (int k = 0; k + period < n; ++k)
        report.defect = std::max(report.defect, (trace.points[k + period] - trace.points[k]).norm());
    if (period % 2 == 0) {
        report.central_symmetry_defect = 0.0;
        for (int k = 0; k + period / 2 < n; ++k)
            report.central_symmetry_defect =
                std::max(report.central_symmetry_defect,
                         (trace.points[k + period / 2] + trace.points[k]).norm());
    }
    return report;
}

BoundednessStats boundedness_stats(const OrbitTrace& trace) {
    BoundednessStats stats;
    if (trace.points.empty()) return stats;
    stats.min_norm = std::numeric_limits<double>::infinity();
    for (const Vector& z : trace.points) {
        double n = z.norm();
        stats.max_norm = std::max(stats.max_norm, n);
        stats.min_norm = std::min(stats.min_norm, n);
    }
    stats.n_steps = static_cast<int>(trace.points.size()) - 1;
    if (stats.n_steps > 0)
        stats.drift = (trace.points.back().norm() - trace.points.front().norm()) / stats.n_steps;
    return stats;
}

}  // namespace osb
