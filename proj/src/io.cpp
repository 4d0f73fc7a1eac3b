#include "osb/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace osb {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_orbit_csv(const std::string& path, const OrbitTrace& trace) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_orbit_csv: cannot open '" + path + "'");
    const int d = trace.points.empty() ? 0 : static_cast<int>(trace.points.front().size());
    os << "step";
    for (int i = 1; i <= d; ++i) os << ",z_" << i;
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    os << ",t,residual\n";
    // row k: the point z_k and the tangency that maps it to z_{k+1}
    for (std::size_t k = 0; k < trace.tangencies.size(); ++k) {
        os << k;
        for (int i = 0; i < d; ++i) os << ',' << format_double(trace.points[k][i]);
        for (int i = 0; i < d; ++i) os << ',' << format_double(trace.tangencies[k].x.x[i]);
        os << ',' << format_double(trace.tangencies[k].t) << ','
           << format_double(trace.tangencies[k].residual) << '\n';
    }
}

std::string orbit_json(const OrbitTrace& trace, const std::string& body_hash,
                       const ToleranceConfig& tol, std::uint64_t seed) {
    json j;
    j["body_label"] = trace.body_label;
    j["body_hash"] = body_hash;
    j["seed"] = seed;
    j["tolerances"] = {{"eq_tol", tol.eq_tol},
                       {"newton_tol", tol.newton_tol},
                       {"newton_max_iter", tol.newton_max_iter},
                       {"fd_step", tol.fd_step}};
    j["truncated"] = trace.truncated;
    if (trace.truncated) j["truncation_reason"] = trace.truncation_reason;
    json pts = json::array();
    for (const Vector& z : trace.points) {
        json p = json::array();
        for (int i = 0; i < z.size(); ++i) p.push_back(z[i]);
        pts.push_back(p);
    }
    j["points"] = pts;
    json tans = json::array();
    for (const TangencySolution& t : trace.tangencies) {
        json e;
        json x = json::array();
        for (int i = 0; i < t.x.x.size(); ++i) x.push_back(t.x.x[i]);
        e["x"] = x;
        e["t"] = t.t;
        e["residual"] = t.residual;
        e["iterations"] = t.iterations;
        tans.push_back(e);
    }
    j["tangencies"] = tans;
    return j.dump(2);
}

void write_curve_csv(const std::string& path, const PlanarCurve& curve) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_curve_csv: cannot open '" + path + "'");
    os << "x,y\n";
    for (const Vector2& v : curve.vertices)
        os << format_double(v[0]) << ',' << format_double(v[1]) << '\n';
}

PlanarCurve read_curve_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("read_curve_csv: cannot open '" + path + "'");
    PlanarCurve curve;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
            throw InvalidInput("read_curve_csv: line " + std::to_string(lineno) +
                               ": expected two comma-separated values");
        try {
            curve.vertices.emplace_back(std::stod(a), std::stod(b));
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw InvalidInput("read_curve_csv: line " + std::to_string(lineno) +
                               ": not numeric");
        }
    }
    if (curve.vertices.size() < 3)
        throw InvalidInput("read_curve_csv: fewer than 3 vertices in '" + path + "'");
    // drop an explicitly repeated closing vertex
    if ((curve.vertices.front() - curve.vertices.back()).norm() < 1e-14)
        curve.vertices.pop_back();
    return curve;
}

}  // namespace osb
