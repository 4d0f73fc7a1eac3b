#ifndef OSB_HYPERSURFACE_HPP
#define OSB_HYPERSURFACE_HPP

#include "osb/billiard.hpp"
#include "osb/convex_body.hpp"
#include "osb/types.hpp"

#include <cstdint>
#include <vector>

namespace osb {

/// Sampled representation of Y = {x + f(x) : x on the boundary}. In
/// dimension two the entries are sorted by the angle of y and the angles are
/// strictly monotone (star-shape prerequisite).
struct HypersurfaceSample {
    int dim = 0;
    std::vector<BoundaryPoint> sources;  // x, with fvec cached
    std::vector<Vector> points;          // y = x + f(x)
    std::vector<double> angles;          // dim 2 only, ascending
};

struct PlanarCurve {
    std::vector<Vector2> vertices;  // closed; no repeated endpoint
};

struct StarShapeReport {
    // dimension 2
    double monotonicity_defect = 0.0;  // min angle increment over the grid
    // dimension >= 4
    double min_jacobian_sv = 0.0;      // smallest singular value of [Dg frame | g]
    int ray_multiplicity = 1;          // max solutions found on any probed ray
    bool pass = false;
};

struct LineCrossings {
    int count = 0;
    std::vector<double> ts;  // crossing parameters along {x + t f(x)}
};

struct PlanarityReport {
    double gamma_defect = 0.0;       // max distance of the flow from span{x0, f(x0)}
    double delta_char_defect = 0.0;  // max sin angle( d/dt f(gamma), f(f(gamma)) )
};

struct LineCheckConfig {
    double t_min = -3.0;
    double t_max = 3.0;
    int resolution = 2000;  // dim 2: samples along the line
    int y_grid = 20000;     // dim 2: Y polygon size when no cache is supplied
    int n_starts = 14;      // dim >= 4: Newton multistarts
};

/// Boundary sampling mapped through g(x) = x + f(x). Dimension two uses a
/// uniform angle grid; higher dimensions use seeded Gaussian directions.
HypersurfaceSample sample_Y(const ConvexBody& body, int n_samples,
                            std::uint64_t seed, const ToleranceConfig& tol = {});

/// |T(x + f(x)) - (f(x) - x)|: grid-free invariance check through the exact
/// identity T(x + f(x)) = -x + f(x).
double invariance_defect(const ConvexBody& body, const BoundaryPoint& x,
                         const ToleranceConfig& tol = {});

/// Radius of the sampled Y in direction theta (dimension two), by segment
/// interpolation on the angle-sorted polygon.
double radial_function_2d(const HypersurfaceSample& sample, double theta);

StarShapeReport star_shape_check(const ConvexBody& body, int n_samples,
                                 std::uint64_t seed, const ToleranceConfig& tol = {});

/// Normalized determinant of the differential of g augmented with the radial
/// direction; bounded away from zero iff the radial ray is transversal to Y.
double radial_transversality(const ConvexBody& body, const BoundaryPoint& x,
                             const ToleranceConfig& tol = {});

/// Counts intersections of the characteristic tangent line {x + t f(x)} with
/// Y. Expected exactly two, at t = +-1. Dimension two scans the sampled
/// curve; higher dimensions solve g(w) = x + t f(x) from multistarts and
/// cluster the solutions.
LineCrossings line_two_point_check(const ConvexBody& body, const BoundaryPoint& x,
                                   const LineCheckConfig& cfg = {},
                                   const ToleranceConfig& tol = {},
                                   const HypersurfaceSample* cached_sample = nullptr);

/// Integrates the characteristic flow from x0 and measures (a) how far it
/// leaves the 2-plane span{x0, f(x0)} and (b) whether t -> f(gamma(t)) is
/// itself characteristic. Ball-like bodies give zero for both; a genuinely
/// non-ellipsoidal self-polar body shows a positive delta defect somewhere.
PlanarityReport planarity_defect(const ConvexBody& body, const BoundaryPoint& x0,
                                 double t_max, int steps,
                                 const ToleranceConfig& tol = {});

/// The area construction: from a closed curve enclosing area A > 4, cut
/// constant-area (A-4)/4 chords and return the closed midpoint curve (the
/// recovered boundary).
PlanarCurve area_construction_2d(const PlanarCurve& y_curve);

/// Shoelace area of sampled Y divided by the area of X (dimension two);
/// equals 2 for self-polar bodies.
double area_ratio_2d(const ConvexBody& body, int n_samples,
                     const ToleranceConfig& tol = {});

/// Sup over directions of the radial distance between two star-shaped curves
/// (an upper bound for the Hausdorff distance, tight for our curves).
double radial_sup_distance(const PlanarCurve& a, const PlanarCurve& b);

/// Same, against a body's true boundary.
double radial_sup_distance(const PlanarCurve& curve, const ConvexBody& body);

}  // namespace osb

#endif
