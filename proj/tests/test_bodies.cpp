#include "osb/bodies.hpp"
#include "osb/rng.hpp"
#include "osb/symplectic.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace osb;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

double ellipse_gauge(const Vector& v) { return std::sqrt(v[0] * v[0] / 4.0 + 4.0 * v[1] * v[1]); }

}  // namespace

TEST_CASE("factory preconditions") {
    CHECK_THROWS_AS(make_ball(3), InvalidInput);
    CHECK_THROWS_AS(make_lp_ball(1.0, 2), InvalidInput);
    CHECK_THROWS_AS(make_lp_ball(0.5, 2), InvalidInput);
    CHECK_THROWS_AS(make_lp_ball(4.0, 1), InvalidInput);
    CHECK_THROWS_AS(make_interval(0.0), InvalidInput);
}

TEST_CASE("l2 sum of intervals is the canonical ellipse") {
    ConvexBody sum = make_l2_sum(make_interval(2.0), make_interval(0.5));
    CHECK(sum.dim == 2);
    CHECK(sum.smoothness == Smoothness::Cinf);
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        Vector v = rng.uniform(0.2, 3.0) * rng.direction(2);
        CHECK(gauge(sum, v) == doctest::Approx(ellipse_gauge(v)).epsilon(1e-13));
    }
}

TEST_CASE("l2 sum of balls is the joint ball") {
    ConvexBody sum = make_l2_sum(make_ball(2), make_ball(2));
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        Vector v = rng.gaussian_vector(4);
        CHECK(gauge(sum, v) == doctest::Approx(v.norm()).epsilon(1e-13));
    }
}

TEST_CASE("lagrangian sum") {
    // k = ball: the sum is the ball of the doubled dimension
    ConvexBody lb = make_lagrangian_sum(make_ball(2));
    Rng rng(3);
    for (int i = 0; i < 30; ++i) {
        Vector v = rng.gaussian_vector(4);
        CHECK(gauge(lb, v) == doctest::Approx(v.norm()).epsilon(1e-12));
    }

    // k = l4 ball: gauge is sqrt(||x||_4^2 + ||y||_{4/3}^2)
    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    CHECK(lag.dim == 4);
    CHECK(lag.smoothness == Smoothness::C1);
    CHECK(lag.self_polar_validated);
    auto norm_p = [](double a, double b, double p) {
        return std::pow(std::pow(std::abs(a), p) + std::pow(std::abs(b), p), 1.0 / p);
    };
    for (int i = 0; i < 30; ++i) {
        Vector v = rng.gaussian_vector(4);
        double want = std::hypot(norm_p(v[0], v[1], 4.0), norm_p(v[2], v[3], 4.0 / 3.0));
        CHECK(gauge(lag, v) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(self_polarity_defect(lag, 200, 4).max_gauge_defect <= 1e-8);

    // k = interval [-2, 2]: the canonical ellipse again
    ConvexBody ell = realize(BodySpec::lagrangian_sum(
        BodySpec::linear_image(BodySpec::ball(1), (Matrix(1, 1) << 2.0).finished())));
    for (int i = 0; i < 30; ++i) {
        Vector v = rng.uniform(0.3, 2.0) * rng.direction(2);
        CHECK(gauge(ell, v) == doctest::Approx(ellipse_gauge(v)).epsilon(1e-12));
    }

    // runtime op with the generic numeric polar agrees with the structural one
    ConvexBody lag_num = make_lagrangian_sum(make_lp_ball(4, 2));
    for (int i = 0; i < 10; ++i) {
        Vector v = rng.uniform(0.4, 1.8) * rng.direction(4);
        CHECK(gauge(lag_num, v) == doctest::Approx(gauge(lag, v)).epsilon(1e-10));
    }
}

TEST_CASE("symplectic l2 sum") {
    ConvexBody ball4 = make_symplectic_l2_sum(make_ball(2), make_ball(2));
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        Vector v = rng.gaussian_vector(4);
        CHECK(gauge(ball4, v) == doctest::Approx(v.norm()).epsilon(1e-13));
    }

    ConvexBody ell = make_ellipsoid((Matrix(2, 2) << 0.25, 0, 0, 4).finished(), "ellipse");
    ell.self_polar_validated = true;
    ConvexBody ss = make_symplectic_l2_sum(ell, ell);
    CHECK(ss.dim == 4);
    CHECK(self_polarity_defect(ss, 200, 6).max_gauge_defect <= 1e-8);
    // interleaving: the first ellipse lives on (x1, y1), the second on (x2, y2)
    Vector v(4);
    v << 2, 0, 0, 0;
    CHECK(gauge(ss, v) == doctest::Approx(1.0).epsilon(1e-13));
    v << 0, 2, 0, 0;
    CHECK(gauge(ss, v) == doctest::Approx(1.0).epsilon(1e-13));

    ConvexBody mixed = make_symplectic_l2_sum(ell, make_ball(2));
    CHECK(self_polarity_defect(mixed, 100, 7).max_gauge_defect <= 1e-8);

    // the self-polarity gate rejects a non-self-polar factor
    CHECK_THROWS_AS(make_symplectic_l2_sum(make_lp_ball(4, 4), make_ball(2)), InvalidInput);
}

TEST_CASE("linear images") {
    ConvexBody ball = make_ball(2);
    Matrix L(2, 2);
    L << 2, 0, 0, 0.5;
    ConvexBody ell = make_linear_image(ball, L);
    Rng rng(8);
    for (int i = 0; i < 40; ++i) {
        Vector v = rng.uniform(0.2, 2.5) * rng.direction(2);
        CHECK(gauge(ell, v) == doctest::Approx(ellipse_gauge(v)).epsilon(1e-13));
    }
    CHECK(is_symplectic_matrix(L));

    ConvexBody same = make_linear_image(ball, Matrix::Identity(2, 2));
    ConvexBody rotated = make_linear_image(ball, (Matrix(2, 2) << 0, -1, 1, 0).finished());
    for (int i = 0; i < 20; ++i) {
        Vector v = rng.gaussian_vector(2);
        CHECK(gauge(same, v) == doctest::Approx(v.norm()).epsilon(1e-14));
        CHECK(gauge(rotated, v) == doctest::Approx(v.norm()).epsilon(1e-14));
    }

    CHECK_THROWS_AS(make_linear_image(ball, Matrix::Zero(2, 2)), InvalidInput);
    CHECK_THROWS_AS(make_linear_image(ball, Matrix::Identity(4, 4)), InvalidInput);

    // a symplectic image of a self-polar body stays self-polar: (LX)^w = L X^w
    Rng lrng(9);
    Matrix Ls = oracle::random_symplectic(4, lrng);
    ConvexBody lb4 = make_linear_image(make_ball(4), Ls);
    CHECK(self_polarity_defect(lb4, 100, 10).max_gauge_defect <= 1e-9);
}

TEST_CASE("patched self-polar body") {
    // delta = 0 is exactly the ball
    ConvexBody flat = make_patched_selfpolar(1, 0.2, 0.0, 7);
    Rng rng(11);
    for (int i = 0; i < 60; ++i) {
        Vector v = rng.uniform(0.3, 2.0) * rng.direction(2);
        CHECK(gauge(flat, v) == doctest::Approx(v.norm()).epsilon(1e-11));
    }

    ConvexBody p2 = make_patched_selfpolar(1, 0.2, 0.03, 7);
    CHECK(p2.self_polar_validated);
    CHECK(self_polarity_defect(p2, 300, 12).max_gauge_defect <= 1e-5);
    CHECK(convexity_probe(p2, 2000, 13).max_violation <= 1e-6);

    // the bump is really there, and the body is not any ellipse
    Vector c = vec2(1, 1).normalized();
    CHECK(gauge(p2, c) < 1.0 - 1e-5);
    CHECK(oracle::ellipse_fit_residual_2d(p2) > 1e-5);
    CHECK(oracle::ellipse_fit_residual_2d(make_linear_image(make_ball(2),
                                                            (Matrix(2, 2) << 2, 0, 0, 0.5).finished())) < 1e-10);

    ConvexBody p4 = make_patched_selfpolar(2, 0.3, 0.02, 7);
    CHECK(p4.self_polar_validated);
    CHECK(self_polarity_defect(p4, 200, 14).max_gauge_defect <= 1e-5);

    // excessive amplitude is rejected with the failing metric
    try {
        make_patched_selfpolar(1, 0.2, 0.5, 7);
        FAIL("delta = 0.5 should have been rejected");
    } catch (const GateFailure& e) {
        CHECK(e.metric == "convexity_probe");
        CHECK(e.value > 1e-6);
    }

    CHECK_THROWS_AS(make_patched_selfpolar(1, 0.9, 0.01, 7), InvalidInput);
    CHECK_THROWS_AS(make_patched_selfpolar(2, 0.6, 0.01, 7), InvalidInput);  // 1/sqrt(4) = 0.5
}

TEST_CASE("numeric polar") {
    ConvexBody pb = numeric_polar(make_ball(2));
    Rng rng(15);
    for (int i = 0; i < 20; ++i) {
        Vector v = rng.gaussian_vector(2);
        CHECK(gauge(pb, v) == doctest::Approx(v.norm()).epsilon(1e-13));
    }

    // polar of l4 is l_{4/3}
    ConvexBody p43 = numeric_polar(make_lp_ball(4, 2));
    ConvexBody l43 = make_lp_ball(4.0 / 3.0, 2);
    for (int i = 0; i < 40; ++i) {
        Vector v = rng.uniform(0.3, 2.0) * rng.direction(2);
        CHECK(gauge(p43, v) == doctest::Approx(gauge(l43, v)).epsilon(1e-8));
    }

    // bipolar through the numeric route: strip the shortcut so the second
    // polar really maximizes over the first
    ConvexBody l4 = make_lp_ball(4, 2);
    ConvexBody polar1 = numeric_polar(l4);
    polar1.support_fn = nullptr;
    ConvexBody bipolar = numeric_polar(polar1);
    for (int i = 0; i < 15; ++i) {
        Vector v = rng.uniform(0.4, 1.6) * rng.direction(2);
        CHECK(gauge(bipolar, v) == doctest::Approx(gauge(l4, v)).epsilon(1e-5));
    }
}

TEST_CASE("l2 sum commutes with polar") {
    ConvexBody a = make_lp_ball(4, 2);
    ConvexBody b = make_lp_ball(1.5, 2);
    ConvexBody sum = make_l2_sum(a, b);
    ConvexBody polar_of_sum = numeric_polar(sum);
    ConvexBody sum_of_polars = make_l2_sum(numeric_polar(a), numeric_polar(b));
    Rng rng(16);
    for (int i = 0; i < 30; ++i) {
        Vector v = rng.uniform(0.4, 1.8) * rng.direction(4);
        CHECK(gauge(polar_of_sum, v) == doctest::Approx(gauge(sum_of_polars, v)).epsilon(1e-6));
    }
}

TEST_CASE("spec round-trips and diagnostics") {
    BodySpec b4 = BodySpec::ball(4);
    CHECK(parse_spec(serialize_spec(b4)) == b4);

    BodySpec lag = BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2));
    CHECK(parse_spec(serialize_spec(lag)) == lag);
    CHECK(realize(lag).dim == 4);

    BodySpec li = BodySpec::linear_image(BodySpec::ball(2),
                                         (Matrix(2, 2) << 2, 0, 0, 0.5).finished());
    CHECK(parse_spec(serialize_spec(li)) == li);

    BodySpec pat = BodySpec::patched(1, 0.2, 0.03, 7);
    CHECK(parse_spec(serialize_spec(pat)) == pat);

    // the documented inline example parses (version defaults to 1)
    BodySpec inline_spec =
        parse_spec(R"({"type":"lagrangian_sum","k":{"type":"lp_ball","p":4.0,"dim":2}})");
    CHECK(inline_spec == lag);

    // flat row-major matrices are accepted
    BodySpec flat = parse_spec(
        R"({"v":1,"type":"linear_image","inner":{"type":"ball","dim":2},"matrix":[2,0,0,0.5]})");
    CHECK(flat == li);

    CHECK_THROWS_AS(parse_spec(R"({"v":1,"type":"mystery"})"), InvalidInput);
    CHECK_THROWS_AS(parse_spec(R"({"v":2,"type":"ball","dim":2})"), InvalidInput);
    CHECK_THROWS_AS(parse_spec(R"({"v":1,"type":"ball"})"), InvalidInput);
    CHECK_THROWS_AS(parse_spec(R"({"v":1,"type":"lp_ball","p":0.5,"dim":2})"), InvalidInput);
    CHECK_THROWS_AS(parse_spec("not json at all"), InvalidInput);

    // standalone 1-D bodies are rejected; as l2-sum ingredients they are fine
    CHECK_THROWS_AS(realize(BodySpec::ball(1)), InvalidInput);
    CHECK_THROWS_AS(realize(BodySpec::ball(3)), InvalidInput);
    BodySpec ell = BodySpec::l2_sum(
        BodySpec::linear_image(BodySpec::ball(1), (Matrix(1, 1) << 2.0).finished()),
        BodySpec::linear_image(BodySpec::ball(1), (Matrix(1, 1) << 0.5).finished()));
    ConvexBody e = realize(ell);
    CHECK(gauge(e, vec2(2, 0)) == doctest::Approx(1.0).epsilon(1e-13));

    CHECK(spec_hash(b4) != spec_hash(lag));
    CHECK(spec_hash(b4) == spec_hash(parse_spec(serialize_spec(b4))));

    // structural polars
    BodySpec out;
    CHECK(polar_spec(BodySpec::lp_ball(4, 2), out));
    CHECK(out.p == doctest::Approx(4.0 / 3.0));
    CHECK(polar_spec(BodySpec::numeric_polar(b4), out));
    CHECK(out == b4);
    CHECK_FALSE(polar_spec(pat, out));

    // realize is deterministic
    ConvexBody r1 = realize(pat), r2 = realize(pat);
    Rng rng(17);
    for (int i = 0; i < 10; ++i) {
        Vector v = rng.uniform(0.5, 1.5) * rng.direction(2);
        CHECK(gauge(r1, v) == gauge(r2, v));
    }
}

TEST_CASE("every factory output passes the gauge invariants") {
    // evenness, homogeneity, convexity, Euler on one compact loop
    std::vector<ConvexBody> bodies;
    bodies.push_back(make_ball(2));
    bodies.push_back(make_lp_ball(1.5, 2));
    bodies.push_back(make_lp_ball(3, 4));
    bodies.push_back(realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2))));
    bodies.push_back(make_patched_selfpolar(1, 0.2, 0.03, 7));
    Rng rng(18);
    for (const ConvexBody& body : bodies) {
        ToleranceConfig tol = default_tolerances(body);
        CHECK(convexity_probe(body, 300, 19).max_violation <= tol.eq_tol);
        for (int i = 0; i < 40; ++i) {
            Vector v = rng.uniform(0.3, 1.8) * rng.direction(body.dim);
            double s = rng.uniform(0.2, 5.0);
            double g = gauge(body, v);
            CHECK(std::abs(gauge(body, Vector(-v)) - g) <= tol.eq_tol * std::max(1.0, g));
            CHECK(std::abs(gauge(body, Vector(s * v)) - s * g) <= tol.eq_tol * s * g);
        }
    }
}
