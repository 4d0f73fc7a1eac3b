#ifndef OSB_IO_HPP
#define OSB_IO_HPP

#include "osb/billiard.hpp"
#include "osb/hypersurface.hpp"
#include "osb/types.hpp"

#include <string>

namespace osb {

/// Orbit CSV: header step, z_1..z_2n, x_1..x_2n, t, residual.
void write_orbit_csv(const std::string& path, const OrbitTrace& trace);

/// JSON mirror of a trace with metadata (body hash, tolerances, seed).
std::string orbit_json(const OrbitTrace& trace, const std::string& body_hash,
                       const ToleranceConfig& tol, std::uint64_t seed);

/// Planar curve CSV: two columns, no repeated closing vertex.
void write_curve_csv(const std::string& path, const PlanarCurve& curve);
PlanarCurve read_curve_csv(const std::string& path);

std::string format_double(double v);  // 17 significant digits

}  // namespace osb

#endif
