#include "osb/bodies.hpp"
#include "osb/rng.hpp"
#include "osb/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace osb {

namespace {

// C-infinity step: 0 below 0, 1 above 1, exp(-1/s)-flat at both ends.
double step_sigma(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

double step_phi(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = step_sigma(s), b = step_sigma(1.0 - s);
    return a / (a + b);
}

double step_dphi(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    double a = step_sigma(s), b = step_sigma(1.0 - s);
    double da = a / (s * s), db = b / ((1.0 - s) * (1.0 - s));
    double sum = a + b;
    return (da * b + a * db) / (sum * sum);
}

// Radial bump profile: psi(v) = prod_i phi((v_i/|v| - eps_lo)/ramp_i) plus
// the same factor at -v. Supported exactly in the direction cones
// {min_i u_i >= eps_lo} and its antipode, C-infinity, 0-homogeneous.
struct BumpProfile {
    int dim = 0;
    double eps_lo = 0.0;
    Vector ramps;

    double one_sided(const Vector& v) const {
        const double r = v.norm();
        double prod = 1.0;
        for (int i = 0; i < dim; ++i) {
            double f = step_phi((v[i] / r - eps_lo) / ramps[i]);
            if (f == 0.0) return 0.0;
            prod *= f;
        }
        return prod;
    }

    Vector grad_one_sided(const Vector& v) const {
        const double r = v.norm();
        const Vector u = v / r;
        Vector f(dim), df(dim);
        int zeros = 0, zero_at = -1;
        for (int i = 0; i < dim; ++i) {
            double s = (u[i] - eps_lo) / ramps[i];
            f[i] = step_phi(s);
            df[i] = step_dphi(s);
            if (f[i] == 0.0) {
                ++zeros;
                zero_at = i;
            }
        }
        Vector grad = Vector::Zero(dim);
        if (zeros >= 2) return grad;
        for (int i = 0; i < dim; ++i) {
            if (zeros == 1 && i != zero_at) continue;
            if (df[i] == 0.0) continue;
            double rest = 1.0;
            for (int j = 0; j < dim; ++j)
                if (j != i) rest *= f[j];
            if (rest == 0.0) continue;
            // d s_i / d v = (e_i - u_i u) / (r ramp_i)
            double c = rest * df[i] / (r * ramps[i]);
            grad[i] += c;
            grad -= (c * u[i]) * u;
        }
        return grad;
    }

    double value(const Vector& v) const { return one_sided(v) + one_sided(-v); }

    Vector grad(const Vector& v) const {
        return Vector(grad_one_sided(v) - grad_one_sided(-v));
    }
};

struct PatchedGeometry {
    int n = 0, dim = 0;
    double epsilon = 0.0, delta = 0.0;
    double amplitude = 0.0;  // actual radial bump height
    BumpProfile bump;
};

bool in_cone(const Vector& w, double eps) {
    return w.minCoeff() > eps * w.norm();
}

// The amplitude scale is fixed by the cone geometry alone, so that deltas up
// to 0.05 yield provably consistent and convex bodies while large deltas are
// rejected by validation (not silently rescued).
PatchedGeometry plan_geometry(int n, double epsilon, double delta, std::uint64_t seed) {
    const int dim = 2 * n;
    const double cone_peak = 1.0 / std::sqrt(double(dim));
    if (!(epsilon > 0.0) || !(epsilon < cone_peak))
        throw InvalidInput("make_patched_selfpolar: need 0 < epsilon < 1/sqrt(2n) = " +
                           std::to_string(cone_peak));
    if (!(delta >= 0.0)) throw InvalidInput("make_patched_selfpolar: delta must be >= 0");

    const double budget = cone_peak - epsilon;
    const double pad = 0.35 * budget;

    PatchedGeometry geo;
    geo.n = n;
    geo.dim = dim;
    geo.epsilon = epsilon;
    geo.delta = delta;
    geo.bump.dim = dim;
    geo.bump.eps_lo = epsilon + pad;
    geo.bump.ramps.resize(dim);
    Rng rng(seed);
    double min_ramp = 1e9;
    for (int i = 0; i < dim; ++i) {
        geo.bump.ramps[i] = 0.55 * budget * rng.uniform(0.8, 1.0);
        min_ramp = std::min(min_ramp, geo.bump.ramps[i]);
    }

    // support-spread cap: h_X must stay exactly |u| outside the outer cone,
    // which holds when amp <= (pad^2/2) / (1 - pad^2/2) with margin
    const double spread_cap = 0.5 * pad * pad / (1.0 - 0.5 * pad * pad) / 1.2;
    // convexity cap: the radial bump curvature perturbation ~ amp * C / ramp^2
    const double convex_cap = 0.5 * min_ramp * min_ramp / 25.0;
    const double amp_cap = std::min(spread_cap, convex_cap);
    geo.amplitude = delta * (amp_cap / 0.05);
    return geo;
}

ConvexBody make_bumped_ball(const PatchedGeometry& geo) {
    const double a = geo.amplitude;
    const BumpProfile bump = geo.bump;

    ConvexBody body;
    body.dim = geo.dim;
    body.smoothness = Smoothness::Cinf;
    body.label = "bumped_ball";
    body.gauge_fn = [bump, a](const Vector& v) {
        double r = v.norm();
        if (r == 0.0) return 0.0;
        return r / (1.0 + a * bump.value(v));
    };
    body.gradient_fn = [bump, a](const Vector& v) {
        double r = v.norm();
        double R = 1.0 + a * bump.value(v);
        return Vector(v / (r * R) - (r * a / (R * R)) * bump.grad(v));
    };
    return body;
}

struct PatchedEvaluator {
    PatchedGeometry geo;
    ConvexBody bumped;  // X: the ball with the radial bump
    ToleranceConfig solver_tol;

    bool dent_region(const Vector& v, Vector& w) const {
        w = -apply_J(v);
        return in_cone(w, geo.epsilon) || in_cone(Vector(-w), geo.epsilon);
    }

    double gauge(const Vector& v) const {
        double r = v.norm();
        if (r == 0.0) return 0.0;
        Vector w;
        if (dent_region(v, w)) return support_point(bumped, w, solver_tol).value;
        return r / (1.0 + geo.amplitude * geo.bump.value(v));
    }

    Vector gradient(const Vector& v) const {
        Vector w;
        if (dent_region(v, w)) return apply_J(support_point(bumped, w, solver_tol).maximizer);
        double r = v.norm();
        double R = 1.0 + geo.amplitude * geo.bump.value(v);
        return Vector(v / (r * R) - (r * geo.amplitude / (R * R)) * geo.bump.grad(v));
    }
};

void validate_patched(const ConvexBody& body, const PatchedGeometry& geo, std::uint64_t seed) {
    const int dim = geo.dim;
    const ToleranceConfig tol = ToleranceConfig::numeric();
    Rng rng(Rng::fork(seed, 17).next_u64());

    Vector center = Vector::Ones(dim) / std::sqrt(double(dim));

    auto cone_direction = [&]() {
        Vector d = center + rng.uniform(0.0, 0.55) * rng.direction(dim);
        d.normalize();
        return d;
    };

    // J as a matrix, for steering probes into the dent cones
    Matrix Jm = Matrix::Zero(dim, dim);
    Jm.topRightCorner(dim / 2, dim / 2) = -Matrix::Identity(dim / 2, dim / 2);
    Jm.bottomLeftCorner(dim / 2, dim / 2) = Matrix::Identity(dim / 2, dim / 2);

    // 1. convexity, stressed around the patched cones and across the seams
    double worst = 0.0;
    auto probe_pair = [&](const Vector& da, const Vector& db) {
        Vector a = rng.uniform(0.95, 1.05) / body.gauge_fn(da) * da;
        Vector b = rng.uniform(0.95, 1.05) / body.gauge_fn(db) * db;
        double lam = rng.uniform(0.1, 0.9);
        double lhs = body.gauge_fn(lam * a + (1.0 - lam) * b);
        double rhs = lam * body.gauge_fn(a) + (1.0 - lam) * body.gauge_fn(b);
        worst = std::max(worst, lhs - rhs);
    };
    const int per_kind = 600;
    for (int i = 0; i < per_kind; ++i) {
        probe_pair(cone_direction(), cone_direction());                      // inside the bump
        probe_pair(Vector(Jm * cone_direction()), Vector(Jm * cone_direction()));  // the dent
        probe_pair(cone_direction(), rng.direction(dim));                    // across the seam
        probe_pair(rng.direction(dim), rng.direction(dim));                  // global
    }
    if (worst > 1e-8)
        throw GateFailure("make_patched_selfpolar: construction rejected, convexity violated by " +
                              std::to_string(worst) + " (shrink delta)",
                          "convexity_probe", worst);

    // 2. self-polarity
    const double defect =
        self_polarity_defect(body, 96, Rng::fork(seed, 23).next_u64(), tol).max_gauge_defect;
    if (defect > 1e-5)
        throw GateFailure("make_patched_selfpolar: construction rejected, self-polarity defect " +
                              std::to_string(defect),
                          "self_polarity_defect", defect);

    // 3. gradient continuity across the dent-piece switch surface (the cone
    //    boundary of -Jv): both sides must agree because the bump support
    //    keeps a positive margin inside the cone
    double seam_worst = 0.0;
    for (int i = 0; i < 64; ++i) {
        Vector u = cone_direction();
        // slide u onto the cone boundary min_j u_j = epsilon by bisection
        int arg = 0;
        u.minCoeff(&arg);
        double lo = 0.0, hi = 2.0;
        auto min_at = [&](double t) {
            Vector c = u;
            c[arg] -= t;
            c.normalize();
            return c.minCoeff() - geo.epsilon;
        };
        if (min_at(0.0) > 0.0) {
            while (min_at(hi) > 0.0) hi *= 2.0;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                (min_at(mid) > 0.0 ? lo : hi) = mid;
            }
        }
        Vector seam = u;
        seam[arg] -= 0.5 * (lo + hi);
        seam.normalize();
        const double h = 1e-5;
        Vector inside = seam, outside = seam;
        inside[arg] += h;
        outside[arg] -= h;
        inside.normalize();
        outside.normalize();
        Vector v_in = -Jm * inside;   // dent branch (−J(v_in) = inside ∈ C)
        Vector v_out = -Jm * outside; // ball/bump branch
        seam_worst = std::max(seam_worst, (gauge_gradient(body, v_in, tol) -
                                           gauge_gradient(body, v_out, tol)).norm());
    }
    // the straddle itself is 2e-5 wide; on the sphere the gradient is
    // 1-Lipschitz there, so anything much above that is a seam jump
    if (seam_worst > 1e-4)
        throw GateFailure("make_patched_selfpolar: construction rejected, seam gradient jump " +
                              std::to_string(seam_worst),
                          "seam_gradient", seam_worst);
}

}  // namespace

ConvexBody make_patched_selfpolar(int n, double epsilon, double delta, std::uint64_t seed) {
    if (n < 1) throw InvalidInput("make_patched_selfpolar: n must be >= 1");
    PatchedGeometry geo = plan_geometry(n, epsilon, delta, seed);

    auto eval = std::make_shared<PatchedEvaluator>();
    eval->geo = geo;
    eval->bumped = make_bumped_ball(geo);
    eval->solver_tol = ToleranceConfig::analytic();

    ConvexBody body;
    body.dim = geo.dim;
    body.smoothness = Smoothness::Cinf;
    body.numeric = true;
    body.label = "patched(n=" + std::to_string(n) + ",eps=" + std::to_string(epsilon) +
                 ",delta=" + std::to_string(delta) + ")";
    body.gauge_fn = [eval](const Vector& v) { return eval->gauge(v); };
    body.gradient_fn = [eval](const Vector& v) { return eval->gradient(v); };

    if (geo.amplitude > 0.0) validate_patched(body, geo, seed);
    body.self_polar_validated = true;
    return body;
}

}  // namespace osb
