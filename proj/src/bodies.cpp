#include "osb/bodies.hpp"

#include "osb/symplectic.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace osb {

namespace {

constexpr std::uint64_t kGateSeed = 0x9a7eull;

double gate_threshold(const ConvexBody& body) {
    return body.numeric ? 1e-5 : 1e-8;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
    Vector out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

void scatter_add(Vector& out, const Vector& part, const std::vector<int>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] += part[i];
}

}  // namespace

ConvexBody make_ellipsoid(const Matrix& Q, std::string label) {
    const int d = static_cast<int>(Q.rows());
    Eigen::LLT<Matrix> llt(Q);
    if (llt.info() != Eigen::Success)
        throw InvalidInput("make_ellipsoid: quadratic form is not positive definite");
    Matrix Qinv = Q.inverse();

    ConvexBody body;
    body.dim = d;
    body.smoothness = Smoothness::Cinf;
    body.ellipsoidal = true;
    body.quad_form = Q;
    body.label = std::move(label);
    body.gauge_fn = [Q](const Vector& v) { return std::sqrt(std::max(0.0, v.dot(Q * v))); };
    body.gradient_fn = [Q](const Vector& v) {
        Vector qv = Q * v;
        return Vector(qv / std::sqrt(v.dot(qv)));
    };
    body.hessian_fn = [Q](const Vector& v) {
        Vector qv = Q * v;
        double g = std::sqrt(v.dot(qv));
        return Matrix(Q / g - qv * qv.transpose() / (g * g * g));
    };
    body.support_fn = [Qinv](const Vector& u) { return std::sqrt(std::max(0.0, u.dot(Qinv * u))); };
    return body;
}

ConvexBody make_ball(int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw InvalidInput("make_ball: dim must be even and >= 2");
    ConvexBody body = make_ellipsoid(Matrix::Identity(dim, dim), "ball" + std::to_string(dim));
    body.self_polar_validated = true;
    return body;
}

ConvexBody make_interval(double halfwidth) {
    if (!(halfwidth > 0)) throw InvalidInput("make_interval: halfwidth must be positive");
    Matrix Q(1, 1);
    Q(0, 0) = 1.0 / (halfwidth * halfwidth);
    return make_ellipsoid(Q, "interval(" + std::to_string(halfwidth) + ")");
}

ConvexBody make_lp_ball(double p, int dim) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw InvalidInput("make_lp_ball: need 1 < p < infinity (strict convexity and C1 smoothness)");
    if (dim < 2) throw InvalidInput("make_lp_ball: dim must be >= 2; use an interval for 1-D");
    if (p == 2.0) {
        ConvexBody b = make_ellipsoid(Matrix::Identity(dim, dim), "lp(2)" + std::to_string(dim));
        return b;
    }
    const double q = p / (p - 1.0);

    auto norm_p = [](const Vector& v, double pp) {
        double m = v.cwiseAbs().maxCoeff();
        if (m == 0.0) return 0.0;
        double s = 0.0;
        for (int i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]) / m, pp);
        return m * std::pow(s, 1.0 / pp);
    };

    ConvexBody body;
    body.dim = dim;
    body.numeric = false;
    // even integer exponents give a polynomial level set, hence C-infinity
    // away from the origin; otherwise C2 for p >= 2 and C1 below
    bool even_int = (p == std::floor(p)) && (std::fmod(p, 2.0) == 0.0);
    body.smoothness = p < 2.0 ? Smoothness::C1 : (even_int ? Smoothness::Cinf : Smoothness::C2);
    body.label = "lp(" + std::to_string(p) + ")" + std::to_string(dim);
    body.gauge_fn = [norm_p, p](const Vector& v) { return norm_p(v, p); };
    body.gradient_fn = [norm_p, p](const Vector& v) {
        double g = norm_p(v, p);
        Vector grad(v.size());
        for (int i = 0; i < v.size(); ++i) {
            double w = std::abs(v[i]) / g;
            grad[i] = (v[i] >= 0 ? 1.0 : -1.0) * std::pow(w, p - 1.0);
        }
        return grad;
    };
    // valid away from the coordinate hyperplanes; for p < 2 the diagonal
    // blows up as |v_i|^{p-2} there, which is the true curvature behavior
    body.hessian_fn = [norm_p, p](const Vector& v) {
        double g = norm_p(v, p);
        const int d = static_cast<int>(v.size());
        Vector w(d), s(d);
        for (int i = 0; i < d; ++i) {
            w[i] = std::max(std::abs(v[i]) / g, 1e-300);
            s[i] = v[i] >= 0 ? 1.0 : -1.0;
        }
        Matrix H(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double diag = (i == j) ? std::pow(w[i], p - 2.0) : 0.0;
                H(i, j) = (p - 1.0) / g *
                          (diag - std::pow(w[i], p - 1.0) * std::pow(w[j], p - 1.0) * s[i] * s[j]);
            }
        return H;
    };
    body.support_fn = [norm_p, q](const Vector& u) { return norm_p(u, q); };
    return body;
}

namespace detail {

ConvexBody make_embedded_l2_sum(const ConvexBody& a, const ConvexBody& b,
                                std::vector<int> idx_a, std::vector<int> idx_b,
                                std::string label) {
    const int dim = static_cast<int>(idx_a.size() + idx_b.size());

    if (a.ellipsoidal && b.ellipsoidal) {
        Matrix Q = Matrix::Zero(dim, dim);
        for (std::size_t i = 0; i < idx_a.size(); ++i)
            for (std::size_t j = 0; j < idx_a.size(); ++j)
                Q(idx_a[i], idx_a[j]) = a.quad_form(i, j);
        for (std::size_t i = 0; i < idx_b.size(); ++i)
            for (std::size_t j = 0; j < idx_b.size(); ++j)
                Q(idx_b[i], idx_b[j]) = b.quad_form(i, j);
        return make_ellipsoid(Q, std::move(label));
    }

    ConvexBody body;
    body.dim = dim;
    body.numeric = a.numeric || b.numeric;
    // an l2-sum of non-ellipsoidal parts is generally no better than C1 at
    // the axis points where one block vanishes
    body.smoothness = Smoothness::C1;
    body.label = std::move(label);

    auto ga = a.gauge_fn;
    auto gb = b.gauge_fn;
    body.gauge_fn = [ga, gb, idx_a, idx_b](const Vector& v) {
        return std::hypot(ga(gather(v, idx_a)), gb(gather(v, idx_b)));
    };
    if (a.has_gradient() && b.has_gradient()) {
        auto da = a.gradient_fn;
        auto db = b.gradient_fn;
        body.gradient_fn = [ga, gb, da, db, idx_a, idx_b, dim](const Vector& v) {
            Vector va = gather(v, idx_a), vb = gather(v, idx_b);
            double na = ga(va), nb = gb(vb);
            double g = std::hypot(na, nb);
            Vector grad = Vector::Zero(dim);
            // G_a * grad G_a extends by zero where the block vanishes
            if (na > 0.0) scatter_add(grad, Vector(na / g * da(va)), idx_a);
            if (nb > 0.0) scatter_add(grad, Vector(nb / g * db(vb)), idx_b);
            return grad;
        };
    }
    if (a.has_gradient() && b.has_gradient() && a.has_hessian() && b.has_hessian()) {
        // Hess G from Hess(G^2) = blockdiag(2 grad Ga grad Ga^T + 2 Ga Hess Ga, ...)
        auto ga2 = a.gauge_fn;
        auto gb2 = b.gauge_fn;
        auto da = a.gradient_fn;
        auto db = b.gradient_fn;
        auto ha = a.hessian_fn;
        auto hb = b.hessian_fn;
        body.hessian_fn = [ga2, gb2, da, db, ha, hb, idx_a, idx_b, dim](const Vector& v) {
            Vector va = gather(v, idx_a), vb = gather(v, idx_b);
            double na = ga2(va), nb = gb2(vb);
            double g = std::hypot(na, nb);
            Matrix hq = Matrix::Zero(dim, dim);
            Vector gq = Vector::Zero(dim);
            if (na > 0.0) {
                Vector grad_a = da(va);
                Matrix block = 2.0 * (grad_a * grad_a.transpose() + na * ha(va));
                for (std::size_t i = 0; i < idx_a.size(); ++i)
                    for (std::size_t j = 0; j < idx_a.size(); ++j)
                        hq(idx_a[i], idx_a[j]) = block(i, j);
                scatter_add(gq, Vector(2.0 * na * grad_a), idx_a);
            }
            if (nb > 0.0) {
                Vector grad_b = db(vb);
                Matrix block = 2.0 * (grad_b * grad_b.transpose() + nb * hb(vb));
                for (std::size_t i = 0; i < idx_b.size(); ++i)
                    for (std::size_t j = 0; j < idx_b.size(); ++j)
                        hq(idx_b[i], idx_b[j]) = block(i, j);
                scatter_add(gq, Vector(2.0 * nb * grad_b), idx_b);
            }
            return Matrix(hq / (2.0 * g) - gq * gq.transpose() / (4.0 * g * g * g));
        };
    }
    if (a.has_support() && b.has_support()) {
        auto ha = a.support_fn;
        auto hb = b.support_fn;
        body.support_fn = [ha, hb, idx_a, idx_b](const Vector& u) {
            return std::hypot(ha(gather(u, idx_a)), hb(gather(u, idx_b)));
        };
    }
    return body;
}

}  // namespace detail

ConvexBody make_l2_sum(const ConvexBody& a, const ConvexBody& b) {
    std::vector<int> idx_a(a.dim), idx_b(b.dim);
    std::iota(idx_a.begin(), idx_a.end(), 0);
    std::iota(idx_b.begin(), idx_b.end(), a.dim);
    return detail::make_embedded_l2_sum(a, b, std::move(idx_a), std::move(idx_b),
                                        "l2sum(" + a.label + "," + b.label + ")");
}

ConvexBody make_lagrangian_sum(const ConvexBody& k) {
    return make_lagrangian_sum_with_polar(k, numeric_polar(k));
}

ConvexBody make_lagrangian_sum_with_polar(const ConvexBody& k, const ConvexBody& k_polar) {
    if (k_polar.dim != k.dim)
        throw InvalidInput("make_lagrangian_sum: polar dimension mismatch");
    ConvexBody body = make_l2_sum(k, k_polar);
    body.label = "lagrangian_sum(" + k.label + ")";
    const double defect =
        self_polarity_defect(body, 48, kGateSeed, default_tolerances(body)).max_gauge_defect;
    if (defect > gate_threshold(body))
        throw GateFailure("make_lagrangian_sum: self-polarity gate failed for '" + body.label +
                              "' (defect " + std::to_string(defect) + ")",
                          "self_polarity_defect", defect);
    body.self_polar_validated = true;
    return body;
}

ConvexBody make_symplectic_l2_sum(const ConvexBody& x, const ConvexBody& y) {
    const int na = half_dim(x.dim), nb = half_dim(y.dim);
    const int N = na + nb;

    for (const ConvexBody* part : {&x, &y}) {
        if (part->self_polar_validated) continue;
        const double defect =
            self_polarity_defect(*part, 32, kGateSeed, default_tolerances(*part)).max_gauge_defect;
        if (defect > 10 * gate_threshold(*part))
            throw InvalidInput("make_symplectic_l2_sum: input '" + part->label +
                               "' is not self-polar (defect " + std::to_string(defect) + ")");
    }

    // interleaving that keeps the standard form standard on each block:
    // block A takes (x_1..x_na, y_1..y_na), block B the remaining pairs
    std::vector<int> idx_a(2 * na), idx_b(2 * nb);
    for (int i = 0; i < na; ++i) {
        idx_a[i] = i;
        idx_a[na + i] = N + i;
    }
    for (int i = 0; i < nb; ++i) {
        idx_b[i] = na + i;
        idx_b[nb + i] = N + na + i;
    }
    ConvexBody body = detail::make_embedded_l2_sum(
        x, y, std::move(idx_a), std::move(idx_b),
        "symplectic_l2sum(" + x.label + "," + y.label + ")");
    body.self_polar_validated = true;
    return body;
}

bool is_symplectic_matrix(const Matrix& L, double tol) {
    const int d = static_cast<int>(L.rows());
    if (L.cols() != d || d % 2 != 0) return false;
    const int n = d / 2;
    Matrix J = Matrix::Zero(d, d);
    J.topRightCorner(n, n) = -Matrix::Identity(n, n);
    J.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
    return (L.transpose() * J * L - J).cwiseAbs().maxCoeff() <= tol;
}

ConvexBody make_linear_image(const ConvexBody& inner, const Matrix& L) {
    if (L.rows() != inner.dim || L.cols() != inner.dim)
        throw InvalidInput("make_linear_image: matrix must be " + std::to_string(inner.dim) +
                           "x" + std::to_string(inner.dim));
    Eigen::FullPivLU<Matrix> lu(L);
    if (!lu.isInvertible()) throw InvalidInput("make_linear_image: singular matrix");
    Matrix Linv = lu.inverse();
    Matrix LinvT = Linv.transpose();
    Matrix LT = L.transpose();

    if (inner.ellipsoidal)
        return make_ellipsoid(LinvT * inner.quad_form * Linv, "linear_image(" + inner.label + ")");

    ConvexBody body;
    body.dim = inner.dim;
    body.numeric = inner.numeric;
    body.smoothness = inner.smoothness;
    body.label = "linear_image(" + inner.label + ")";
    auto g = inner.gauge_fn;
    body.gauge_fn = [g, Linv](const Vector& v) { return g(Linv * v); };
    if (inner.has_gradient()) {
        auto dg = inner.gradient_fn;
        body.gradient_fn = [dg, Linv, LinvT](const Vector& v) { return Vector(LinvT * dg(Linv * v)); };
    }
    if (inner.has_hessian()) {
        auto hg = inner.hessian_fn;
        body.hessian_fn = [hg, Linv, LinvT](const Vector& v) {
            return Matrix(LinvT * hg(Linv * v) * Linv);
        };
    }
    if (inner.has_support()) {
        auto h = inner.support_fn;
        body.support_fn = [h, LT](const Vector& u) { return h(LT * u); };
    }
    return body;
}

ConvexBody numeric_polar(const ConvexBody& inner) {
    if (inner.ellipsoidal)
        return make_ellipsoid(inner.quad_form.inverse(), "polar(" + inner.label + ")");

    ConvexBody body;
    body.dim = inner.dim;
    body.label = "polar(" + inner.label + ")";
    body.numeric = !inner.has_support();
    body.smoothness = inner.smoothness == Smoothness::Cinf ? Smoothness::C2 : Smoothness::C1;

    // capture by value; the polar owns a copy of the inner bundle
    ConvexBody in = inner;
    if (inner.has_support()) {
        auto h = inner.support_fn;
        body.gauge_fn = [h](const Vector& v) { return h(v); };
    } else {
        body.gauge_fn = [in](const Vector& v) {
            if (v.norm() == 0.0) return 0.0;
            return support_point(in, v).value;
        };
    }
    // grad h_X(u) is the support maximizer (envelope theorem)
    body.gradient_fn = [in](const Vector& v) { return support_point(in, v).maximizer; };
    // support of the polar is the gauge of the body: exact, no solver
    auto g = inner.gauge_fn;
    body.support_fn = [g](const Vector& u) { return g(u); };
    return body;
}

}  // namespace osb
