#ifndef OSB_BILLIARD_HPP
#define OSB_BILLIARD_HPP

#include "osb/convex_body.hpp"
#include "osb/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace osb {

enum class Orientation { Forward, Backward };

/// Tangency data for an exterior point z: the boundary point x whose
/// characteristic line passes through z, with z = x - t f(x), t > 0 for the
/// forward orientation (so omega(x, x - z) = t > 0).
struct TangencySolution {
    BoundaryPoint x;
    double t = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct OrbitTrace {
    std::vector<Vector> points;                 // z_0 .. z_N
    std::vector<TangencySolution> tangencies;   // one per accepted step
    std::string body_label;
    bool truncated = false;
    std::string truncation_reason;
};

struct FourPeriodicReport {
    std::array<Vector, 4> vertices;
    std::array<double, 4> edge_defects{};  // |T(z_i) - z_{i+1}|
    double symplectic_area = 0.0;
    double symmetry_defect = 0.0;          // |z_3 + z_1| + |z_4 + z_2|
};

struct PeriodicityReport {
    double defect = 0.0;                   // max_k |z_{k+p} - z_k|
    double central_symmetry_defect = -1.0; // max_k |z_{k+p/2} + z_k| (even p)
};

struct BoundednessStats {
    double max_norm = 0.0;
    double min_norm = 0.0;
    double drift = 0.0;  // (|z_N| - |z_0|) / N
    int n_steps = 0;
};

/// Solve {x - t f(x) = z, G(x) = 1} (forward; backward flips the sign of t)
/// by damped Newton on the augmented system, with multistart on failure and
/// a guaranteed angle-bisection fallback in dimension two.
TangencySolution tangency_solve(const ConvexBody& body, const Vector& z,
                                Orientation orient, const ToleranceConfig& tol = {});

/// The symplectic outer billiard map T(z) = 2x - z (reflection of z in the
/// forward tangency point).
Vector outer_map(const ConvexBody& body, const Vector& z,
                 const ToleranceConfig& tol = {});

/// T^-1, via the reversed orientation of the characteristic line bundle.
Vector outer_map_inverse(const ConvexBody& body, const Vector& z,
                         const ToleranceConfig& tol = {});

/// N forward images of z0 (backward when inverse is set) with per-step
/// tangency records. Solver failures truncate the trace and are recorded
/// rather than thrown.
OrbitTrace iterate(const ConvexBody& body, const Vector& z0, int n_steps,
                   const ToleranceConfig& tol = {}, bool inverse = false);

/// The centrally symmetric 4-periodic parallelogram through a boundary
/// point: x + f, -x + f, -x - f, x - f. Gated on self-polarity.
std::array<Vector, 4> four_periodic_family(const ConvexBody& body,
                                           const BoundaryPoint& x,
                                           const ToleranceConfig& tol = {});

/// Same vertices plus the expensive postconditions: each edge verified by
/// the outer map, symplectic area, central symmetry.
FourPeriodicReport four_periodic_defects(const ConvexBody& body,
                                         const BoundaryPoint& x,
                                         const ToleranceConfig& tol = {});

PeriodicityReport periodicity_defect(const OrbitTrace& trace, int period);

BoundednessStats boundedness_stats(const OrbitTrace& trace);

}  // namespace osb

#endif
