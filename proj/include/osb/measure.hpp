#ifndef OSB_MEASURE_HPP
#define OSB_MEASURE_HPP

#include "osb/convex_body.hpp"
#include "osb/hypersurface.hpp"
#include "osb/types.hpp"

#include <cstdint>
#include <string>

namespace osb {

struct VolumeEstimate {
    double value = 0.0;
    double stderr_ = 0.0;  // binomial CLT of the hit fraction
    long long n_samples = 0;
    std::string method = "monte_carlo";
};

struct MahlerReport {
    VolumeEstimate estimate;
    double bound = 0.0;          // 2^n / n!
    double margin_sigmas = 0.0;  // (value - bound) / stderr
};

/// Signed shoelace area made positive; the curve must be closed and simple
/// (checked via star-shape monotonicity about the origin).
double shoelace_area(const PlanarCurve& curve);

/// omega(z2 - z1, z4 - z1) after validating the parallelogram identity
/// z1 + z3 = z2 + z4.
double symplectic_parallelogram_area(const Vector& z1, const Vector& z2,
                                     const Vector& z3, const Vector& z4);

/// Hit-fraction Monte Carlo in a validated bounding box (coordinate radii
/// x 1.5). Sharded deterministically: the estimate depends on the seed only,
/// never on the thread count (OSB_THREADS caps parallelism).
VolumeEstimate mc_volume(const ConvexBody& body, long long n_samples,
                         std::uint64_t seed);

/// Volume estimate against the self-polar lower bound 2^n/n!. Reported, not
/// asserted: a negative margin flags "check the construction".
MahlerReport mahler_diagnostic(const ConvexBody& body, long long n_samples = 1000000,
                               std::uint64_t seed = 1);

}  // namespace osb

#endif
