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

Vector unit(int dim, int i) {
    Vector v = Vector::Zero(dim);
    v[i] = 1.0;
    return v;
}

ConvexBody ellipse_body() {
    return make_ellipsoid((Matrix(2, 2) << 0.25, 0.0, 0.0, 4.0).finished(), "ellipse");
}

}  // namespace

TEST_CASE("omega and J conventions") {
    CHECK(omega(unit(2, 0), unit(2, 1)) == 1.0);
    CHECK(omega(unit(4, 0), unit(4, 2)) == 1.0);
    CHECK((apply_J(vec2(1, 0)) - vec2(0, 1)).norm() == 0.0);
    CHECK((apply_J(vec2(0, 1)) - vec2(-1, 0)).norm() == 0.0);
    CHECK((apply_J(unit(4, 0)) - unit(4, 2)).norm() == 0.0);

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        Vector u = rng.gaussian_vector(4), v = rng.gaussian_vector(4);
        CHECK(std::abs(omega(u, u)) < 1e-15);
        CHECK(omega(u, v) == doctest::Approx(-omega(v, u)).epsilon(1e-14));
        CHECK(omega(apply_J(u), apply_J(v)) == doctest::Approx(omega(u, v)).epsilon(1e-13));
        CHECK((apply_J(apply_J(u)) + u).norm() < 1e-15);
    }
    CHECK_THROWS_AS(omega(unit(2, 0), unit(4, 0)), InvalidInput);
    CHECK_THROWS_AS(apply_J(Vector::Ones(3)), InvalidInput);
}

TEST_CASE("char_map examples and postconditions") {
    ConvexBody ball = make_ball(2);
    BoundaryPoint bp = char_boundary_point(ball, vec2(1, 0));
    CHECK((bp.fvec - vec2(0, 1)).norm() < 1e-14);

    ConvexBody ell = ellipse_body();
    BoundaryPoint be = char_boundary_point(ell, vec2(2, 0));
    CHECK((be.fvec - vec2(0, 0.5)).norm() < 1e-14);
    CHECK(omega(be.x, be.fvec) == doctest::Approx(1.0).epsilon(1e-14));

    ConvexBody ball4 = make_ball(4);
    CHECK((char_boundary_point(ball4, unit(4, 0)).fvec - unit(4, 2)).norm() < 1e-14);

    // omega(x, f) = 1 and omega(xi, f) = 0 for tangent xi, on random bodies
    Rng rng(11);
    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    for (const ConvexBody* body : {&ball4, &lag}) {
        for (int i = 0; i < 30; ++i) {
            BoundaryPoint p = char_boundary_point(*body, rng.direction(body->dim));
            CHECK(omega(p.x, p.fvec) == doctest::Approx(1.0).epsilon(1e-12));
            Vector xi = rng.direction(body->dim);
            xi -= (xi.dot(p.grad) / p.grad.squaredNorm()) * p.grad;
            CHECK(std::abs(omega(xi, p.fvec)) < 1e-12);
        }
    }
}

TEST_CASE("involution f(f(x)) = -x on self-polar bodies") {
    ConvexBody ball = make_ball(2);
    CHECK(check_involution(ball, char_boundary_point(ball, vec2(1, 0))).defect < 1e-14);

    ConvexBody ell = ellipse_body();
    BoundaryPoint be = char_boundary_point(ell, vec2(2, 0));
    // f((0, 1/2)) = (-2, 0) by hand: grad at (0, 1/2) is (0, 2), J of it is (-2, 0)
    CHECK(check_involution(ell, be).defect < 1e-13);

    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    double worst = 0.0;
    for (const BoundaryPoint& p : sample_boundary(lag, 100, 21)) {
        BoundaryPoint q = p;
        q.fvec = apply_J(p.grad);
        worst = std::max(worst, check_involution(lag, q).defect);
    }
    CHECK(worst <= 1e-8);

    // non-self-polar body: the defect is macroscopic at a generic point
    ConvexBody l4r4 = make_lp_ball(4, 4);
    Vector diag = Vector::Ones(4);
    double d = check_involution(l4r4, char_boundary_point(l4r4, diag)).defect;
    CHECK(d > 0.5);
}

TEST_CASE("char_map_derivative") {
    ConvexBody ball = make_ball(2);
    BoundaryPoint bp = char_boundary_point(ball, vec2(1, 0));
    Vector d = char_map_derivative(ball, bp, vec2(0, 1));
    CHECK((d - vec2(-1, 0)).norm() < 1e-12);
    CHECK(omega(vec2(0, 1), d) == doctest::Approx(1.0).epsilon(1e-12));

    ConvexBody ell = ellipse_body();
    BoundaryPoint be = char_boundary_point(ell, vec2(2, 0));
    Vector de = char_map_derivative(ell, be, vec2(0, 1));
    // FD oracle along the tangent
    const double h = 1e-6;
    Vector fp = apply_J(gauge_gradient(ell, vec2(2, h)));
    Vector fm = apply_J(gauge_gradient(ell, vec2(2, -h)));
    CHECK((de - (fp - fm) / (2 * h)).norm() < 1e-6);
    CHECK(omega(vec2(0, 1), de) > 0.0);

    CHECK_THROWS_AS(char_map_derivative(ball, bp, vec2(1, 0)), InvalidInput);  // not tangent

    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    BoundaryPoint bl = char_boundary_point(lag, Vector::Ones(4));
    Vector xi = Vector::Zero(4);
    xi[0] = bl.grad[1];
    xi[1] = -bl.grad[0];
    CHECK_THROWS_AS(char_map_derivative(lag, bl, xi), SmoothnessError);
}

TEST_CASE("positivity of omega(xi, D_xi f)") {
    CHECK(positivity_scan(make_ball(2), 100, 3) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(positivity_scan(ellipse_body(), 200, 4) > 0.0);
    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    CHECK_THROWS_AS(positivity_scan(lag, 10, 5), SmoothnessError);
}

TEST_CASE("symplectic polar gauge") {
    ConvexBody ball = make_ball(2);
    CHECK(symplectic_polar_gauge(ball, vec2(0, 1)) == doctest::Approx(1.0).epsilon(1e-13));

    ConvexBody ell = ellipse_body();
    CHECK(symplectic_polar_gauge(ell, vec2(2, 0)) == doctest::Approx(1.0).epsilon(1e-13));

    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    for (const BoundaryPoint& p : sample_boundary(lag, 40, 8))
        CHECK(symplectic_polar_gauge(lag, p.x) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("self-polarity detector") {
    SelfPolarityReport ball_rep = self_polarity_defect(make_ball(2), 100, 5);
    CHECK(ball_rep.max_gauge_defect < 1e-12);
    CHECK(ball_rep.alpha == doctest::Approx(1.0).epsilon(1e-12));

    // the scaled ball 2B satisfies X = 4 X^w: ||f||_X is constantly 1/4
    ConvexBody twice = make_linear_image(make_ball(2), 2.0 * Matrix::Identity(2, 2));
    SelfPolarityReport rep = self_polarity_defect(twice, 100, 6);
    CHECK(rep.alpha == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.max_fnorm_spread < 1e-12);
    CHECK(rep.max_gauge_defect == doctest::Approx(3.0).epsilon(1e-10));

    // negative control: the plain l4 ball in R4 is far from self-polar
    CHECK(self_polarity_defect(make_lp_ball(4, 4), 200, 7).max_gauge_defect >= 0.05);
}

TEST_CASE("characteristic flow") {
    ConvexBody ball = make_ball(2);
    BoundaryPoint x0 = char_boundary_point(ball, vec2(1, 0));
    CharFlowTrace t = char_flow(ball, x0, 2 * oracle::kPi, 2000);
    CHECK((t.points.back() - t.points.front()).norm() < 1e-6);
    CHECK(t.max_gauge_drift <= 1e-6);

    // R4 ball: the flow from e1 is the planar circle in span{e1, e3}
    ConvexBody ball4 = make_ball(4);
    CharFlowTrace t4 = char_flow(ball4, char_boundary_point(ball4, unit(4, 0)), 3.0, 600);
    for (const Vector& p : t4.points) {
        CHECK(std::abs(p[1]) < 1e-9);
        CHECK(std::abs(p[3]) < 1e-9);
    }

    // ellipse: the characteristic flow has period exactly 2 pi
    ConvexBody ell = ellipse_body();
    CharFlowTrace te = char_flow(ell, char_boundary_point(ell, vec2(2, 0)), 2 * oracle::kPi, 2000);
    CHECK((te.points.back() - te.points.front()).norm() < 1e-6);
    for (const Vector& p : te.points) CHECK(std::abs(gauge(ell, p) - 1.0) <= 1e-9);

    ConvexBody lag = realize(BodySpec::lagrangian_sum(BodySpec::lp_ball(4, 2)));
    CHECK_THROWS_AS(char_flow(lag, char_boundary_point(lag, Vector::Ones(4)), 1.0, 100),
                    SmoothnessError);
}
