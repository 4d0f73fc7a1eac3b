#ifndef OSB_BODIES_HPP
#define OSB_BODIES_HPP

#include "osb/convex_body.hpp"
#include "osb/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace osb {

// ---------------------------------------------------------------------------
// Runtime factories
// ---------------------------------------------------------------------------

/// Unit Euclidean ball; self-polar, analytic gradient and Hessian.
ConvexBody make_ball(int dim);

/// l_p unit ball, 1 < p < infinity (p outside that range violates strict
/// convexity or smoothness). Analytic gradient away from the origin,
/// analytic support (dual norm).
ConvexBody make_lp_ball(double p, int dim);

/// One-dimensional symmetric interval [-halfwidth, halfwidth]; admitted only
/// as an l2-sum ingredient, never as a standalone body.
ConvexBody make_interval(double halfwidth);

/// l2-sum: gauge (x, y) -> sqrt(G_a(x)^2 + G_b(y)^2) on concatenated
/// coordinates.
ConvexBody make_l2_sum(const ConvexBody& a, const ConvexBody& b);

/// Ellipsoid {v : v^T Q v <= 1} with fully analytic evaluators.
ConvexBody make_ellipsoid(const Matrix& Q, std::string label);

/// Lagrangian l2-sum K + K°: x-block gauge of K, y-block gauge of K°
/// (the support of K). Self-polar by construction; the factory verifies.
ConvexBody make_lagrangian_sum(const ConvexBody& k);

/// Same, with a caller-supplied polar (realize() passes the structural dual
/// where a closed form exists).
ConvexBody make_lagrangian_sum_with_polar(const ConvexBody& k, const ConvexBody& k_polar);

/// Symplectic l2-sum of two self-polar bodies, with the coordinate
/// interleaving that keeps the standard form on each block. Gates inputs on
/// their self-polarity defect.
ConvexBody make_symplectic_l2_sum(const ConvexBody& x, const ConvexBody& y);

/// Linear image LX with gauge v -> G(L^-1 v).
ConvexBody make_linear_image(const ConvexBody& inner, const Matrix& L);

/// Whether LX of a self-polar X stays self-polar: L^T J L = J up to eq_tol.
bool is_symplectic_matrix(const Matrix& L, double tol = 1e-9);

/// Ball with a C-infinity radial bump in the direction cone
/// {u : min_i u_i > epsilon |u|} and its antipode, completed to a
/// symplectically self-polar body by using the symplectic-polar gauge on the
/// J-image cones and the Euclidean ball elsewhere. Validates convexity,
/// self-polarity and seam continuity; throws GateFailure with the failing
/// metric if delta is too large for the cone geometry.
ConvexBody make_patched_selfpolar(int n, double epsilon, double delta,
                                  std::uint64_t seed);

/// Polar body as an evaluator bundle: gauge = support of the inner body,
/// smoothness downgraded one class. Structural shortcuts (l_p -> l_q etc.)
/// live on the spec level; this is the generic numeric route.
ConvexBody numeric_polar(const ConvexBody& inner);

// ---------------------------------------------------------------------------
// Serializable body specifications
// ---------------------------------------------------------------------------

struct BodySpec {
    enum class Type {
        Ball,             // {dim}
        LpBall,           // {p, dim}
        L2Sum,            // {left, right}
        LagrangianSum,    // {k}
        SymplecticL2Sum,  // {left, right}
        LinearImage,      // {inner, matrix}
        PatchedSelfPolar, // {n, epsilon, delta, seed}
        NumericPolar      // {inner}
    };

    Type type = Type::Ball;
    int dim = 0;
    double p = 0.0;
    int n = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    Matrix matrix;
    std::vector<BodySpec> children;  // left/right, k, or inner

    bool operator==(const BodySpec& other) const;

    static BodySpec ball(int dim);
    static BodySpec lp_ball(double p, int dim);
    static BodySpec l2_sum(BodySpec left, BodySpec right);
    static BodySpec lagrangian_sum(BodySpec k);
    static BodySpec symplectic_l2_sum(BodySpec left, BodySpec right);
    static BodySpec linear_image(BodySpec inner, Matrix m);
    static BodySpec patched(int n, double epsilon, double delta, std::uint64_t seed);
    static BodySpec numeric_polar(BodySpec inner);
};

/// Parse the JSON text format ({"v":1,"type":...}). Malformed input raises
/// InvalidInput with a field diagnostic.
BodySpec parse_spec(const std::string& text);

/// Canonical JSON serialization; parse(serialize(s)) == s.
std::string serialize_spec(const BodySpec& spec);

/// Dimension the realized body will have (validates tree consistency).
int spec_dim(const BodySpec& spec);

/// Polar of a spec where a closed form exists (dual l_p, l2-sum/polar
/// commutation, (LX)° = L^-T X°, bipolar elimination). Returns false if the
/// spec has no structural polar (the patched body).
bool polar_spec(const BodySpec& spec, BodySpec& out);

/// Build the runtime body. Deterministic given the spec (and its seed).
/// Standalone odd-dimensional bodies are rejected; 1-D ingredients are legal
/// inside l2-sums only.
ConvexBody realize(const BodySpec& spec);

/// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string spec_hash(const BodySpec& spec);

}  // namespace osb

#endif
