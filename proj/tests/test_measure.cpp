#include "osb/bodies.hpp"
#include "osb/measure.hpp"
#include "osb/rng.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace osb;

namespace {

PlanarCurve circle_curve(double radius, int n, const Vector2& center = Vector2(0, 0)) {
    PlanarCurve c;
    for (int k = 0; k < n; ++k) {
        double th = 2.0 * oracle::kPi * k / n;
        c.vertices.emplace_back(center[0] + radius * std::cos(th),
                                center[1] + radius * std::sin(th));
    }
    return c;
}

}  // namespace

TEST_CASE("shoelace area") {
    PlanarCurve square;
    square.vertices = {Vector2(0, 0), Vector2(1, 0), Vector2(1, 1), Vector2(0, 1)};
    CHECK(shoelace_area(square) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(shoelace_area(circle_curve(1.0, 10000)) == doctest::Approx(oracle::kPi).epsilon(1e-6));
    CHECK(shoelace_area(circle_curve(std::sqrt(2.0), 10000)) ==
          doctest::Approx(2.0 * oracle::kPi).epsilon(1e-6));

    PlanarCurve degenerate;
    degenerate.vertices = {Vector2(0, 0), Vector2(1, 1)};
    CHECK_THROWS_AS(shoelace_area(degenerate), InvalidInput);
}

TEST_CASE("symplectic parallelogram area") {
    Vector z1(2), z2(2), z3(2), z4(2);
    z1 << 1, 1;
    z2 << -1, 1;
    z3 << -1, -1;
    z4 << 1, -1;
    CHECK(symplectic_parallelogram_area(z1, z2, z3, z4) == doctest::Approx(4.0).epsilon(1e-15));

    // in the plane the symplectic area is the Euclidean area
    PlanarCurve square;
    square.vertices = {Vector2(1, 1), Vector2(-1, 1), Vector2(-1, -1), Vector2(1, -1)};
    CHECK(shoelace_area(square) == doctest::Approx(4.0).epsilon(1e-15));

    // degenerate parallelogram: z2 = z1, z4 = z3
    CHECK(symplectic_parallelogram_area(z1, z1, z3, z3) == doctest::Approx(0.0));

    // vertices violating the parallelogram identity are rejected
    Vector bad = z4;
    bad[0] += 0.1;
    CHECK_THROWS_AS(symplectic_parallelogram_area(z1, z2, z3, bad), InvalidInput);
}

TEST_CASE("monte carlo volume") {
    // ball R2: area pi
    VolumeEstimate v2 = mc_volume(make_ball(2), 200000, 11);
    CHECK(std::abs(v2.value - oracle::kPi) <= 4.0 * v2.stderr_);

    // ball R4: volume pi^2/2
    VolumeEstimate v4 = mc_volume(make_ball(4), 400000, 12);
    CHECK(std::abs(v4.value - oracle::kPi * oracle::kPi / 2.0) <= 4.0 * v4.stderr_);

    // ellipse: linear image with det 1 keeps area pi
    ConvexBody ell = make_ellipsoid((Matrix(2, 2) << 0.25, 0, 0, 4).finished(), "ellipse");
    VolumeEstimate ve = mc_volume(ell, 200000, 13);
    CHECK(std::abs(ve.value - oracle::kPi) <= 4.0 * ve.stderr_);

    // volume is invariant under symplectic images (det = 1)
    Rng rng(14);
    Matrix L = oracle::random_symplectic(2, rng);
    VolumeEstimate vl = mc_volume(make_linear_image(make_ball(2), L), 200000, 15);
    CHECK(std::abs(vl.value - oracle::kPi) <= 4.0 * std::hypot(vl.stderr_, v2.stderr_) + 4e-3);

    // determinism: same seed, same estimate, bit for bit
    VolumeEstimate again = mc_volume(make_ball(4), 400000, 12);
    CHECK(again.value == v4.value);
    CHECK(again.stderr_ == v4.stderr_);

    CHECK_THROWS_AS(mc_volume(make_ball(2), 0, 1), InvalidInput);
}

TEST_CASE("mahler diagnostic") {
    MahlerReport disk = mahler_diagnostic(make_ball(2), 100000, 21);
    CHECK(disk.bound == doctest::Approx(2.0));
    CHECK(disk.margin_sigmas > 0.0);  // pi > 2

    MahlerReport b4 = mahler_diagnostic(make_ball(4), 200000, 22);
    CHECK(b4.bound == doctest::Approx(2.0));  // 2^2/2! = 2
    CHECK(b4.margin_sigmas > 0.0);            // pi^2/2 > 2

    MahlerReport p2 = mahler_diagnostic(make_patched_selfpolar(1, 0.2, 0.03, 7), 100000, 23);
    CHECK(p2.margin_sigmas > 0.0);
}
