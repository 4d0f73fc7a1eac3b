#include "osb/hypersurface.hpp"

#include "osb/rng.hpp"
#include "osb/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace osb {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

double angle_of(const Vector& y) { return std::atan2(y[1], y[0]); }

// ray/segment intersection radius for an angle-sorted closed polygon
struct PolygonRadial {
    std::vector<double> angles;  // ascending in (-pi, pi]
    std::vector<Vector2> verts;

    static PolygonRadial from_points(const std::vector<Vector2>& pts) {
        PolygonRadial p;
        const std::size_t n = pts.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> ang(n);
        for (std::size_t i = 0; i < n; ++i) ang[i] = std::atan2(pts[i][1], pts[i][0]);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
        p.angles.reserve(n);
        p.verts.reserve(n);
        for (std::size_t i : order) {
            p.angles.push_back(ang[i]);
            p.verts.push_back(pts[i]);
        }
        return p;
    }

    double radius(double theta) const {
        const std::size_t n = verts.size();
        theta = std::remainder(theta, 2.0 * kPi);
        auto it = std::upper_bound(angles.begin(), angles.end(), theta);
        std::size_t hi = it == angles.end() ? 0 : std::size_t(it - angles.begin());
        std::size_t lo = (hi + n - 1) % n;
        const Vector2& a = verts[lo];
        const Vector2& b = verts[hi];
        Vector2 d(std::cos(theta), std::sin(theta));
        Vector2 e = b - a;
        double denom = d[0] * e[1] - d[1] * e[0];
        double cross_ae = a[0] * e[1] - a[1] * e[0];
        if (std::abs(denom) < 1e-15) return a.norm();
        double rho = cross_ae / denom;
        return rho > 0 ? rho : a.norm();
    }
};

PolygonRadial radial_of_sample(const HypersurfaceSample& s) {
    std::vector<Vector2> pts;
    pts.reserve(s.points.size());
    for (const Vector& y : s.points) pts.emplace_back(y[0], y[1]);
    return PolygonRadial::from_points(pts);
}

// orthonormal basis of the tangent space (grad orthogonal complement)
Matrix tangent_frame(const Vector& grad) {
    const int d = static_cast<int>(grad.size());
    Eigen::HouseholderQR<Matrix> qr(Matrix(grad / grad.norm()));
    Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
    return Q.rightCols(d - 1);
}

Matrix g_differential_frame(const ConvexBody& body, const BoundaryPoint& bp,
                            const ToleranceConfig& tol) {
    // columns: (Id + Df) applied to a tangent frame, then g(x) itself
    const int d = body.dim;
    Matrix E = tangent_frame(bp.grad);
    Matrix M(d, d);
    Matrix H = gauge_hessian(body, bp.x, tol);
    const int n = d / 2;
    Matrix JH(d, d);
    JH.topRows(n) = -H.bottomRows(n);
    JH.bottomRows(n) = H.topRows(n);
    M.leftCols(d - 1) = E + JH * E;
    M.col(d - 1) = bp.x + apply_J(bp.grad);
    return M;
}

}  // namespace

HypersurfaceSample sample_Y(const ConvexBody& body, int n_samples, std::uint64_t seed,
                            const ToleranceConfig& tol) {
    if (n_samples < 3) throw InvalidInput("sample_Y: need at least 3 samples");
    HypersurfaceSample s;
    s.dim = body.dim;
    s.sources.reserve(n_samples);
    s.points.reserve(n_samples);
    if (body.dim == 2) {
        for (int k = 0; k < n_samples; ++k) {
            double theta = 2.0 * kPi * k / n_samples;
            Vector v(2);
            v << std::cos(theta), std::sin(theta);
            BoundaryPoint bp = char_boundary_point(body, v, tol);
            s.points.push_back(Vector(bp.x + bp.fvec));
            s.sources.push_back(std::move(bp));
        }
        std::vector<std::size_t> order(s.points.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> ang(s.points.size());
        for (std::size_t i = 0; i < s.points.size(); ++i) ang[i] = angle_of(s.points[i]);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
        HypersurfaceSample sorted;
        sorted.dim = 2;
        for (std::size_t i : order) {
            sorted.sources.push_back(std::move(s.sources[i]));
            sorted.points.push_back(std::move(s.points[i]));
            sorted.angles.push_back(ang[i]);
        }
        return sorted;
    }
    Rng rng(seed);
    for (int k = 0; k < n_samples; ++k) {
        BoundaryPoint bp = char_boundary_point(body, rng.direction(body.dim), tol);
        s.points.push_back(Vector(bp.x + bp.fvec));
        s.sources.push_back(std::move(bp));
    }
    return s;
}

double invariance_defect(const ConvexBody& body, const BoundaryPoint& x,
                         const ToleranceConfig& tol) {
    Vector f = char_map(body, x, tol);
    Vector image = outer_map(body, Vector(x.x + f), tol);
    return (image - (f - x.x)).norm();
}

double radial_function_2d(const HypersurfaceSample& sample, double theta) {
    if (sample.dim != 2 || sample.angles.size() != sample.points.size())
        throw InvalidInput("radial_function_2d: need an angle-sorted 2-D sample");
    for (std::size_t i = 1; i < sample.angles.size(); ++i)
        if (!(sample.angles[i] > sample.angles[i - 1]))
            throw InvalidInput("radial_function_2d: sample angles are not strictly monotone "
                               "(star-shape violation)");
    return radial_of_sample(sample).radius(theta);
}

StarShapeReport star_shape_check(const ConvexBody& body, int n_samples, std::uint64_t seed,
                                 const ToleranceConfig& tol) {
    StarShapeReport report;
    if (body.dim == 2) {
        HypersurfaceSample s = sample_Y(body, n_samples, seed, tol);
        double min_inc = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < s.angles.size(); ++i)
            min_inc = std::min(min_inc, s.angles[i] - s.angles[i - 1]);
        min_inc = std::min(min_inc, s.angles.front() + 2.0 * kPi - s.angles.back());
        report.monotonicity_defect = min_inc;
        report.pass = min_inc > 0.0;
        return report;
    }

    // (a) local diffeomorphism + transversality via the smallest singular
    //     value of [ (Id+Df) frame | g ]
    const int n_jac = std::min(n_samples, 200);
    report.min_jacobian_sv = std::numeric_limits<double>::infinity();
    auto samples = sample_boundary(body, n_jac, seed, tol);
    for (const BoundaryPoint& bp : samples) {
        Matrix M = g_differential_frame(body, bp, tol);
        double sv = M.jacobiSvd().singularValues().minCoeff();
        report.min_jacobian_sv = std::min(report.min_jacobian_sv, sv);
    }

    // (b) ray multiplicity: solve g(x) = rho v from several starts per ray
    //     and count distinct solution clusters with rho > 0
    Rng rng(Rng::fork(seed, 3).next_u64());
    const int d = body.dim;
    const int n_rays = std::min(100, std::max(10, n_samples / 10));
    report.ray_multiplicity = 0;
    for (int ray = 0; ray < n_rays; ++ray) {
        Vector v = rng.direction(d);
        std::vector<std::pair<Vector, double>> clusters;
        for (int s = 0; s < 12; ++s) {
            Vector x0;
            if (s == 0)
                x0 = v;
            else if (s == 1)
                x0 = -apply_J(v);
            else
                x0 = (v + 0.8 * rng.direction(d)).eval();
            if (x0.norm() < 1e-9) continue;
            x0 /= gauge(body, x0);
            double rho = 1.0;
            Vector F(d + 1);
            bool converged = false;
            for (int it = 0; it < 40; ++it) {
                BoundaryPoint bp;
                bp.x = x0;
                bp.grad = gauge_gradient(body, x0, tol);
                Vector f = apply_J(bp.grad);
                F.head(d) = x0 + f - rho * v;
                F[d] = gauge(body, x0) - 1.0;
                if (F.norm() < 1e-10) {
                    converged = true;
                    break;
                }
                Matrix H = gauge_hessian(body, x0, tol);
                const int half = d / 2;
                Matrix JH(d, d);
                JH.topRows(half) = -H.bottomRows(half);
                JH.bottomRows(half) = H.topRows(half);
                Matrix Jm(d + 1, d + 1);
                Jm.topLeftCorner(d, d) = Matrix::Identity(d, d) + JH;
                Jm.topRightCorner(d, 1) = -v;
                Jm.bottomLeftCorner(1, d) = bp.grad.transpose();
                Jm(d, d) = 0.0;
                Vector step = Eigen::PartialPivLU<Matrix>(Jm).solve(-F);
                if (!step.allFinite()) break;
                double damp = 1.0;
                double rn = F.norm();
                for (int k = 0; k < 20; ++k) {
                    Vector x_new = x0 + damp * step.head(d);
                    double rho_new = rho + damp * step[d];
                    if (x_new.norm() > 1e-9) {
                        Vector grad_new = gauge_gradient(body, x_new, tol);
                        Vector F_new(d + 1);
                        F_new.head(d) = x_new + apply_J(grad_new) - rho_new * v;
                        F_new[d] = gauge(body, x_new) - 1.0;
                        if (F_new.allFinite() && F_new.norm() < rn) {
                            x0 = x_new;
                            rho = rho_new;
                            break;
                        }
                    }
                    damp *= 0.5;
                    if (k == 19) it = 40;  // stalled
                }
            }
            if (!converged || rho <= 0) continue;
            bool known = false;
            for (auto& c : clusters)
                if ((c.first - x0).norm() < 1e-6) known = true;
            if (!known) clusters.emplace_back(x0, rho);
        }
        report.ray_multiplicity =
            std::max(report.ray_multiplicity, static_cast<int>(clusters.size()));
    }
    report.pass = report.ray_multiplicity == 1 && report.min_jacobian_sv > 1e-6;
    return report;
}

double radial_transversality(const ConvexBody& body, const BoundaryPoint& x,
                             const ToleranceConfig& tol) {
    if (body.smoothness == Smoothness::C1)
        throw SmoothnessError("radial_transversality: needs a C2 body");
    Matrix M = g_differential_frame(body, x, tol);
    double det = std::abs(M.determinant());
    double scale = 1.0;
    for (int c = 0; c < M.cols(); ++c) scale *= M.col(c).norm();
    return det / scale;
}

LineCrossings line_two_point_check(const ConvexBody& body, const BoundaryPoint& x,
                                   const LineCheckConfig& cfg, const ToleranceConfig& tol,
                                   const HypersurfaceSample* cached_sample) {
    Vector f = char_map(body, x, tol);
    LineCrossings out;

    if (body.dim == 2) {
        HypersurfaceSample own;
        const HypersurfaceSample* s = cached_sample;
        if (s == nullptr) {
            own = sample_Y(body, cfg.y_grid, 0, tol);
            s = &own;
        }
        PolygonRadial poly = radial_of_sample(*s);
        auto sign_fn = [&](double t) {
            Vector2 p(x.x[0] + t * f[0], x.x[1] + t * f[1]);
            return p.norm() - poly.radius(std::atan2(p[1], p[0]));
        };
        double prev_t = cfg.t_min, prev = sign_fn(cfg.t_min);
        for (int k = 1; k <= cfg.resolution; ++k) {
            double t = cfg.t_min + (cfg.t_max - cfg.t_min) * k / cfg.resolution;
            double cur = sign_fn(t);
            if ((prev < 0) != (cur < 0)) {
                double lo = prev_t, hi = t;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if ((sign_fn(lo) < 0) != (sign_fn(mid) < 0))
                        hi = mid;
                    else
                        lo = mid;
                }
                out.ts.push_back(0.5 * (lo + hi));
            }
            prev_t = t;
            prev = cur;
        }
        out.count = static_cast<int>(out.ts.size());
        return out;
    }

    // dim >= 4: solve g(w) = x + t f(x) for (w, t) from spread starts and
    // count solution clusters
    const int d = body.dim;
    Rng rng(0xc0ffeeull);
    std::vector<std::pair<Vector, double>> clusters;
    for (int s = 0; s < cfg.n_starts; ++s) {
        Vector w0;
        if (s == 0)
            w0 = x.x;
        else if (s == 1)
            w0 = -f;
        else
            w0 = (x.x + 1.2 * rng.direction(d)).eval();
        if (w0.norm() < 1e-9) continue;
        w0 /= gauge(body, w0);
        double t = s == 1 ? -1.0 : 1.0;

        Vector F(d + 1);
        bool converged = false;
        for (int it = 0; it < 40; ++it) {
            Vector grad = gauge_gradient(body, w0, tol);
            Vector fw = apply_J(grad);
            F.head(d) = w0 + fw - x.x - t * f;
            F[d] = gauge(body, w0) - 1.0;
            double rn = F.norm();
            if (rn < 1e-10) {
                converged = true;
                break;
            }
            Matrix H = gauge_hessian(body, w0, tol);
            const int half = d / 2;
            Matrix JH(d, d);
            JH.topRows(half) = -H.bottomRows(half);
            JH.bottomRows(half) = H.topRows(half);
            Matrix Jm(d + 1, d + 1);
            Jm.topLeftCorner(d, d) = Matrix::Identity(d, d) + JH;
            Jm.topRightCorner(d, 1) = -f;
            Jm.bottomLeftCorner(1, d) = grad.transpose();
            Jm(d, d) = 0.0;
            Vector step = Eigen::PartialPivLU<Matrix>(Jm).solve(-F);
            if (!step.allFinite()) break;
            double damp = 1.0;
            bool accepted = false;
            for (int k = 0; k < 20; ++k) {
                Vector w_new = w0 + damp * step.head(d);
                double t_new = t + damp * step[d];
                if (w_new.norm() > 1e-9) {
                    Vector grad_new = gauge_gradient(body, w_new, tol);
                    Vector F_new(d + 1);
                    F_new.head(d) = w_new + apply_J(grad_new) - x.x - t_new * f;
                    F_new[d] = gauge(body, w_new) - 1.0;
                    if (F_new.allFinite() && F_new.norm() < rn) {
                        w0 = w_new;
                        t = t_new;
                        accepted = true;
                        break;
                    }
                }
                damp *= 0.5;
            }
            if (!accepted) break;
        }
        if (!converged) continue;
        bool known = false;
        for (auto& c : clusters)
            if ((c.first - w0).norm() < 1e-6 && std::abs(c.second - t) < 1e-6) known = true;
        if (!known) clusters.emplace_back(w0, t);
    }
    for (auto& c : clusters) out.ts.push_back(c.second);
    std::sort(out.ts.begin(), out.ts.end());
    out.count = static_cast<int>(out.ts.size());
    return out;
}

PlanarityReport planarity_defect(const ConvexBody& body, const BoundaryPoint& x0, double t_max,
                                 int steps, const ToleranceConfig& tol) {
    CharFlowTrace flow = char_flow(body, x0, t_max, steps, tol);
    Vector f0 = char_map(body, x0, tol);

    // orthonormal basis of span{x0, f(x0)}
    Matrix Q(body.dim, 2);
    Q.col(0) = x0.x / x0.x.norm();
    Vector b = f0 - f0.dot(Q.col(0)) * Q.col(0);
    Q.col(1) = b / b.norm();

    PlanarityReport report;
    for (const Vector& gamma : flow.points) {
        Vector off = gamma - Q * (Q.transpose() * gamma);
        report.gamma_defect = std::max(report.gamma_defect, off.norm());

        BoundaryPoint bp;
        bp.x = gamma;
        bp.grad = gauge_gradient(body, gamma, tol);
        Vector fg = apply_J(bp.grad);
        // delta-dot = Df(gamma) gamma-dot = Df(gamma) f(gamma), exactly
        Vector delta_dot = char_map_derivative(body, bp, fg, tol);
        Vector fdelta = apply_J(gauge_gradient(body, fg, tol));
        double dn = delta_dot.norm(), wn = fdelta.norm();
        if (dn > 1e-14 && wn > 1e-14) {
            Vector resid = delta_dot - (delta_dot.dot(fdelta) / (wn * wn)) * fdelta;
            report.delta_char_defect = std::max(report.delta_char_defect, resid.norm() / dn);
        }
    }
    return report;
}

PlanarCurve area_construction_2d(const PlanarCurve& y_curve) {
    const std::size_t n = y_curve.vertices.size();
    if (n < 8) throw InvalidInput("area_construction_2d: need at least 8 vertices");

    // orient counterclockwise
    std::vector<Vector2> v = y_curve.vertices;
    double signed_area = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector2& a = v[i];
        const Vector2& b = v[(i + 1) % n];
        signed_area += a[0] * b[1] - a[1] * b[0];
    }
    if (signed_area < 0) {
        std::reverse(v.begin(), v.end());
        signed_area = -signed_area;
    }
    const double A = 0.5 * signed_area;

    // simplicity gate: the curves this construction applies to are
    // star-shaped about the origin, so strict angle monotonicity is the test
    double prev_ang = std::atan2(v[0][1], v[0][0]);
    double total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        double ang = std::atan2(v[i % n][1], v[i % n][0]);
        double inc = std::remainder(ang - prev_ang, 2.0 * kPi);
        if (inc <= 0)
            throw InvalidInput("area_construction_2d: curve is not star-shaped/simple "
                               "(angle monotonicity fails)");
        total += inc;
        prev_ang = ang;
    }
    if (std::abs(total - 2.0 * kPi) > 1e-9)
        throw InvalidInput("area_construction_2d: curve does not wind once around the origin");

    if (!(A > 4.0))
        throw InvalidInput("area_construction_2d: enclosed area " + std::to_string(A) +
                           " <= 4, the cut segment area would not be positive");
    const double target = (A - 4.0) / 4.0;

    auto cross2 = [](const Vector2& a, const Vector2& b) { return a[0] * b[1] - a[1] * b[0]; };

    // prefix sums of cross(v_k, v_{k+1}) for O(1) circular arc areas
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + cross2(v[i], v[(i + 1) % n]);
    auto arc_sum = [&](std::size_t i, std::size_t j) {
        // sum of cross(v_k, v_{k+1}) for k = i..j-1, circular
        if (j >= i) return prefix[j] - prefix[i];
        return prefix[n] - prefix[i] + prefix[j];
    };
    // area of the region cut by the chord from v_i to the point at fraction
    // tau along edge (m, m+1)
    auto cut_area = [&](std::size_t i, std::size_t m, double tau) {
        Vector2 q = v[m] + tau * (v[(m + 1) % n] - v[m]);
        return 0.5 * (arc_sum(i, m) + tau * cross2(v[m], v[(m + 1) % n]) + cross2(q, v[i]));
    };

    PlanarCurve recovered;
    recovered.vertices.resize(n);
    std::size_t m = 1;  // edge pointer, advances monotonically with i
    for (std::size_t i = 0; i < n; ++i) {
        if (m == i) m = (m + 1) % n;
        // advance until the full edge overshoots the target area
        int guard = 0;
        while (cut_area(i, m, 1.0) < target && guard++ < int(2 * n)) {
            m = (m + 1) % n;
            if (m == i) m = (m + 1) % n;
        }
        double a0 = cut_area(i, m, 0.0);
        double a1 = cut_area(i, m, 1.0);
        double tau;
        if (a1 > a0) {
            tau = (target - a0) / (a1 - a0);
            tau = std::clamp(tau, 0.0, 1.0);
            // interpolation corner cases: refine by bisection on the exact
            // (linear-in-tau) cut area
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                double mid = 0.5 * (lo + hi);
                (cut_area(i, m, mid) < target ? lo : hi) = mid;
            }
            double tau_b = 0.5 * (lo + hi);
            if (std::abs(cut_area(i, m, tau_b) - target) < std::abs(cut_area(i, m, tau) - target))
                tau = tau_b;
        } else {
            tau = 1.0;
        }
        Vector2 q = v[m] + tau * (v[(m + 1) % n] - v[m]);
        recovered.vertices[i] = 0.5 * (v[i] + q);
    }
    return recovered;
}

double area_ratio_2d(const ConvexBody& body, int n_samples, const ToleranceConfig& tol) {
    if (body.dim != 2) throw InvalidInput("area_ratio_2d: dimension must be 2");
    HypersurfaceSample s = sample_Y(body, n_samples, 0, tol);
    double area_y = 0.0, area_x = 0.0;
    const std::size_t n = s.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vector& ya = s.points[i];
        const Vector& yb = s.points[(i + 1) % n];
        area_y += ya[0] * yb[1] - ya[1] * yb[0];
        const Vector& xa = s.sources[i].x;
        const Vector& xb = s.sources[(i + 1) % n].x;
        area_x += xa[0] * xb[1] - xa[1] * xb[0];
    }
    return std::abs(area_y) / std::abs(area_x);
}

double radial_sup_distance(const PlanarCurve& a, const PlanarCurve& b) {
    std::vector<Vector2> pa = a.vertices, pb = b.vertices;
    PolygonRadial ra = PolygonRadial::from_points(pa);
    PolygonRadial rb = PolygonRadial::from_points(pb);
    const int grid = 4 * static_cast<int>(std::max(pa.size(), pb.size()));
    double worst = 0.0;
    for (int k = 0; k < grid; ++k) {
        double theta = 2.0 * kPi * k / grid;
        worst = std::max(worst, std::abs(ra.radius(theta) - rb.radius(theta)));
    }
    return worst;
}

double radial_sup_distance(const PlanarCurve& curve, const ConvexBody& body) {
    if (body.dim != 2) throw InvalidInput("radial_sup_distance: dimension must be 2");
    PolygonRadial rc = PolygonRadial::from_points(curve.vertices);
    const int grid = 4 * static_cast<int>(curve.vertices.size());
    double worst = 0.0;
    for (int k = 0; k < grid; ++k) {
        double theta = 2.0 * kPi * k / grid;
        Vector v(2);
        v << std::cos(theta), std::sin(theta);
        worst = std::max(worst, std::abs(rc.radius(theta) - 1.0 / gauge(body, v)));
    }
    return worst;
}

}  // namespace osb
