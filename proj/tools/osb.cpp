// osb: construct symplectically self-polar bodies, run their outer billiard
// dynamics, and execute the verification suites. Emits CSV/JSON plot data;
// exit codes: 0 pass, 2 input error, 3 mathematical-gate failure, 4 solver
// failure.

#include "osb/bodies.hpp"
#include "osb/billiard.hpp"
#include "osb/hypersurface.hpp"
#include "osb/io.hpp"
#include "osb/rng.hpp"
#include "osb/measure.hpp"
#include "osb/symplectic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace osb;
using nlohmann::json;

namespace {

struct SpecArg {
    std::string text;
    BodySpec spec;
    ConvexBody body;
    std::string hash;
};

BodySpec load_spec_text(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg.front() != '{') {
        std::ifstream is(arg);
        if (!is) throw InvalidInput("cannot open spec file '" + arg + "'");
        std::ostringstream buf;
        buf << is.rdbuf();
        text = buf.str();
    }
    return parse_spec(text);
}

SpecArg realize_spec(const std::string& arg) {
    SpecArg s;
    s.text = arg;
    s.spec = load_spec_text(arg);
    s.body = realize(s.spec);
    s.hash = spec_hash(s.spec);
    return s;
}

Vector parse_vector(const std::string& csv, int expected_dim) {
    std::vector<double> vals;
    std::istringstream is(csv);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            vals.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse vector component '" + tok + "'");
        }
    }
    if (expected_dim > 0 && static_cast<int>(vals.size()) != expected_dim)
        throw InvalidInput("expected " + std::to_string(expected_dim) + " components, got " +
                           std::to_string(vals.size()));
    Vector v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
}

void emit(const std::string& payload, const std::string& output) {
    if (output.empty()) {
        std::cout << payload << "\n";
    } else {
        std::ofstream os(output);
        if (!os) throw InvalidInput("cannot open output file '" + output + "'");
        os << payload << "\n";
    }
}

json check_entry(const std::string& name, const std::string& hash, long long n, double worst,
                 bool pass) {
    json j;
    j["check"] = name;
    j["body_hash"] = hash;
    j["n_samples"] = n;
    j["worst_value"] = worst;
    j["pass"] = pass;
    return j;
}

json tolerance_json(const ToleranceConfig& tol) {
    return json{{"eq_tol", tol.eq_tol},
                {"newton_tol", tol.newton_tol},
                {"newton_max_iter", tol.newton_max_iter},
                {"fd_step", tol.fd_step}};
}

// the full invariant suite over one body; every threshold pinned here
json run_verify(const SpecArg& s, const std::string& level, std::uint64_t seed,
                const ToleranceConfig& tol) {
    const ConvexBody& body = s.body;
    const bool full = level == "full";
    const bool numeric = body.numeric;
    const int n_alg = full ? 1000 : 100;    // algebraic identity samples
    const int n_solve = full ? 200 : 25;    // samples that cost a solve each

    const double tol_selfpolar = numeric ? 1e-5 : 1e-8;
    const double tol_involution = numeric ? 1e-5 : 1e-8;
    const double tol_edges = numeric ? 1e-5 : 1e-7;
    const double tol_invariance = numeric ? 1e-5 : 1e-7;

    json checks = json::array();
    Rng rng(seed);

    {  // gauge identities: homogeneity, evenness, Euler
        double worst = 0.0;
        for (int i = 0; i < n_alg; ++i) {
            Vector v = rng.uniform(0.3, 1.8) * rng.direction(body.dim);
            double scale = rng.uniform(0.1, 10.0);
            double g = gauge(body, v);
            worst = std::max(worst, std::abs(gauge(body, Vector(scale * v)) - scale * g) /
                                        (scale * g));
            worst = std::max(worst, std::abs(gauge(body, Vector(-v)) - g) / std::max(1.0, g));
            Vector grad = gauge_gradient(body, v, tol);
            worst = std::max(worst, std::abs(grad.dot(v) - g) / g);
        }
        checks.push_back(check_entry("gauge_identities", s.hash, n_alg, worst,
                                     worst <= std::max(tol.eq_tol, 1e-6)));
    }
    {
        ConvexityReport rep = convexity_probe(body, n_alg, rng.next_u64());
        checks.push_back(
            check_entry("convexity_probe", s.hash, n_alg, rep.max_violation,
                        rep.max_violation <= tol.eq_tol));
    }
    SelfPolarityReport sp = self_polarity_defect(body, full ? 300 : 64, rng.next_u64(), tol);
    checks.push_back(check_entry("self_polarity_defect", s.hash, sp.n_samples,
                                 sp.max_gauge_defect, sp.max_gauge_defect <= tol_selfpolar));
    const bool self_polar = sp.max_gauge_defect <= tol_selfpolar;

    {
        double worst = 0.0;
        for (const BoundaryPoint& bp : sample_boundary(body, n_alg, rng.next_u64(), tol))
            worst = std::max(worst, check_involution(body, bp, tol).defect);
        checks.push_back(check_entry("involution", s.hash, n_alg, worst,
                                     self_polar && worst <= tol_involution));
    }

    if (self_polar) {
        double worst_edge = 0.0, worst_area = 0.0;
        for (const BoundaryPoint& bp : sample_boundary(body, n_solve, rng.next_u64(), tol)) {
            BoundaryPoint q = bp;
            q.fvec = apply_J(bp.grad);
            FourPeriodicReport rep = four_periodic_defects(body, q, tol);
            for (double e : rep.edge_defects) worst_edge = std::max(worst_edge, e);
            worst_area = std::max(worst_area, std::abs(rep.symplectic_area - 4.0));
        }
        checks.push_back(check_entry("four_periodic_edges", s.hash, n_solve, worst_edge,
                                     worst_edge <= tol_edges));
        checks.push_back(check_entry("four_periodic_area", s.hash, n_solve, worst_area,
                                     worst_area <= 1e-9));

        double worst_inv = 0.0;
        for (const BoundaryPoint& bp : sample_boundary(body, n_solve, rng.next_u64(), tol)) {
            BoundaryPoint q = bp;
            q.fvec = apply_J(bp.grad);
            worst_inv = std::max(worst_inv, invariance_defect(body, q, tol));
        }
        checks.push_back(check_entry("hypersurface_invariance", s.hash, n_solve, worst_inv,
                                     worst_inv <= tol_invariance));

        StarShapeReport star = star_shape_check(body, full ? 2000 : 400, rng.next_u64(), tol);
        checks.push_back(check_entry(
            "star_shape", s.hash, full ? 2000 : 400,
            body.dim == 2 ? star.monotonicity_defect : double(star.ray_multiplicity), star.pass));

        if (full) {
            double worst_t = 0.0;
            int bad_counts = 0;
            const int lines = body.dim == 2 ? 50 : 25;
            HypersurfaceSample cache;
            const HypersurfaceSample* cache_ptr = nullptr;
            if (body.dim == 2) {
                cache = sample_Y(body, 20000, rng.next_u64(), tol);
                cache_ptr = &cache;
            }
            for (const BoundaryPoint& bp : sample_boundary(body, lines, rng.next_u64(), tol)) {
                BoundaryPoint q = bp;
                q.fvec = apply_J(bp.grad);
                LineCrossings lc = line_two_point_check(body, q, {}, tol, cache_ptr);
                if (lc.count != 2) {
                    ++bad_counts;
                    continue;
                }
                worst_t = std::max(worst_t, std::abs(std::abs(lc.ts[0]) - 1.0));
                worst_t = std::max(worst_t, std::abs(std::abs(lc.ts[1]) - 1.0));
            }
            checks.push_back(check_entry("line_two_point", s.hash, lines, worst_t,
                                         bad_counts == 0 && worst_t <= 1e-6));
        }

        if (body.dim == 2 && full) {
            double ratio = area_ratio_2d(body, 100000, tol);
            checks.push_back(check_entry("area_ratio", s.hash, 100000, std::abs(ratio - 2.0),
                                         std::abs(ratio - 2.0) <= 1e-4));

            HypersurfaceSample ys = sample_Y(body, 10000, 0, tol);
            PlanarCurve y_curve;
            y_curve.vertices.reserve(ys.points.size());
            for (const Vector& p : ys.points) y_curve.vertices.emplace_back(p[0], p[1]);
            PlanarCurve rec = area_construction_2d(y_curve);
            double hd = radial_sup_distance(rec, body);
            checks.push_back(check_entry("area_construction_roundtrip", s.hash, 10000, hd,
                                         hd <= (numeric ? 1e-4 : 1e-5)));
        }

        if (body.smoothness != Smoothness::C1) {
            double min_pos = positivity_scan(body, full ? 500 : 100, rng.next_u64(), tol);
            checks.push_back(
                check_entry("curvature_positivity", s.hash, full ? 500 : 100, min_pos,
                            min_pos > 0.0));
        }
    }

    bool all_pass = true;
    for (const json& c : checks) all_pass = all_pass && c["pass"].get<bool>();

    json out;
    out["body_label"] = body.label;
    out["body_hash"] = s.hash;
    out["level"] = level;
    out["seed"] = seed;
    out["tolerances"] = tolerance_json(tol);
    out["checks"] = checks;
    out["pass"] = all_pass;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symplectic outer billiards of self-polar convex bodies"};
    app.require_subcommand(1);

    std::string spec_arg, output, start_csv, eval_csv, direction_csv, check_name, level = "quick";
    std::string y_curve_path, truth_spec, json_mirror;
    std::uint64_t seed = 1;
    int steps = 100, samples = 1000;
    long long mc_n = 1000000;
    double boundary_angle = std::numeric_limits<double>::quiet_NaN();
    bool inverse = false;
    int boundary_samples = 0;

    const double unset = std::numeric_limits<double>::quiet_NaN();
    double opt_eq_tol = unset, opt_newton_tol = unset, opt_fd_step = unset;
    int opt_newton_max_iter = 0;

    auto add_spec = [&](CLI::App* cmd) {
        cmd->add_option("--spec", spec_arg, "body spec: JSON file path or inline JSON")
            ->required();
        cmd->add_option("--eq-tol", opt_eq_tol, "override identity-check tolerance");
        cmd->add_option("--newton-tol", opt_newton_tol, "override solver residual tolerance");
        cmd->add_option("--newton-max-iter", opt_newton_max_iter, "override solver iteration cap");
        cmd->add_option("--fd-step", opt_fd_step, "override relative finite-difference step");
    };
    auto make_tol = [&](const ConvexBody& body) {
        ToleranceConfig t = default_tolerances(body);
        if (!std::isnan(opt_eq_tol)) t.eq_tol = opt_eq_tol;
        if (!std::isnan(opt_newton_tol)) t.newton_tol = opt_newton_tol;
        if (!std::isnan(opt_fd_step)) t.fd_step = opt_fd_step;
        if (opt_newton_max_iter > 0) t.newton_max_iter = opt_newton_max_iter;
        t.validate();
        return t;
    };

    CLI::App* body_cmd = app.add_subcommand("body", "realize a body; evaluate its gauge");
    add_spec(body_cmd);
    body_cmd->add_option("--eval", eval_csv, "point to evaluate, comma-separated");
    body_cmd->add_option("--boundary-samples", boundary_samples, "emit N boundary points as CSV");
    body_cmd->add_option("--seed", seed, "sampling seed");
    body_cmd->add_option("--output", output, "output path (default stdout)");

    CLI::App* orbit_cmd = app.add_subcommand("orbit", "iterate the outer billiard map");
    add_spec(orbit_cmd);
    orbit_cmd->add_option("--start", start_csv, "start point, comma-separated")->required();
    orbit_cmd->add_option("--steps", steps, "number of iterations");
    orbit_cmd->add_flag("--inverse", inverse, "iterate the inverse map");
    orbit_cmd->add_option("--output", output, "trace CSV path")->required();
    orbit_cmd->add_option("--json", json_mirror, "JSON mirror path");
    orbit_cmd->add_option("--seed", seed, "recorded in the JSON mirror");

    CLI::App* per4_cmd = app.add_subcommand("periodic4", "the 4-periodic family through a point");
    add_spec(per4_cmd);
    per4_cmd->add_option("--boundary-angle", boundary_angle, "2-D boundary angle theta");
    per4_cmd->add_option("--direction", direction_csv, "direction vector, comma-separated");
    per4_cmd->add_option("--output", output, "output path (default stdout)");

    CLI::App* hyp_cmd = app.add_subcommand("hypersurface", "checks on Y = {x + f(x)}");
    add_spec(hyp_cmd);
    hyp_cmd->add_option("--check", check_name, "invariance|star|two-point|transversality|planarity")
        ->required();
    hyp_cmd->add_option("--samples", samples, "sample count");
    hyp_cmd->add_option("--seed", seed, "sampling seed");
    hyp_cmd->add_option("--output", output, "output path (default stdout)");

    CLI::App* rec_cmd = app.add_subcommand("recover", "area construction: recover X from Y");
    rec_cmd->add_option("--y-curve", y_curve_path, "CSV with the Y curve")->required();
    rec_cmd->add_option("--output", output, "recovered boundary CSV")->required();
    rec_cmd->add_option("--truth", truth_spec, "spec to compare against");

    CLI::App* ver_cmd = app.add_subcommand("verify", "run the invariant suite");
    add_spec(ver_cmd);
    ver_cmd->add_option("--level", level, "quick|full")
        ->check(CLI::IsMember({"quick", "full"}));
    ver_cmd->add_option("--seed", seed, "suite seed");
    ver_cmd->add_option("--output", output, "report path (default stdout)");

    CLI::App* vol_cmd = app.add_subcommand("volume", "Monte Carlo volume + lower-bound margin");
    add_spec(vol_cmd);
    vol_cmd->add_option("--n", mc_n, "sample count");
    vol_cmd->add_option("--seed", seed, "sampling seed");
    vol_cmd->add_option("--output", output, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*body_cmd) {
            SpecArg s = realize_spec(spec_arg);
            ToleranceConfig tol = make_tol(s.body);
            if (!eval_csv.empty()) {
                Vector v = parse_vector(eval_csv, s.body.dim);
                emit(format_double(gauge(s.body, v)), output);
            } else if (boundary_samples > 0) {
                std::ostringstream os;
                for (int i = 1; i <= s.body.dim; ++i) os << (i > 1 ? "," : "") << "x_" << i;
                os << ",gauge\n";
                for (const BoundaryPoint& bp :
                     sample_boundary(s.body, boundary_samples, seed, tol)) {
                    for (int i = 0; i < s.body.dim; ++i)
                        os << (i > 0 ? "," : "") << format_double(bp.x[i]);
                    os << ',' << format_double(gauge(s.body, bp.x)) << '\n';
                }
                std::string payload = os.str();
                payload.pop_back();
                emit(payload, output);
            } else {
                json j;
                j["label"] = s.body.label;
                j["dim"] = s.body.dim;
                j["smoothness"] = to_string(s.body.smoothness);
                j["numeric"] = s.body.numeric;
                j["hash"] = s.hash;
                emit(j.dump(2), output);
            }
        } else if (*orbit_cmd) {
            SpecArg s = realize_spec(spec_arg);
            ToleranceConfig tol = make_tol(s.body);
            Vector z0 = parse_vector(start_csv, s.body.dim);
            OrbitTrace trace = iterate(s.body, z0, steps, tol, inverse);
            write_orbit_csv(output, trace);
            if (!json_mirror.empty()) {
                std::ofstream os(json_mirror);
                if (!os) throw InvalidInput("cannot open '" + json_mirror + "'");
                os << orbit_json(trace, s.hash, tol, seed) << "\n";
            }
            BoundednessStats stats = boundedness_stats(trace);
            json j;
            j["steps_completed"] = static_cast<long long>(trace.tangencies.size());
            j["truncated"] = trace.truncated;
            if (trace.truncated) j["truncation_reason"] = trace.truncation_reason;
            j["max_norm"] = stats.max_norm;
            j["min_norm"] = stats.min_norm;
            j["drift"] = stats.drift;
            std::cout << j.dump(2) << "\n";
        } else if (*per4_cmd) {
            SpecArg s = realize_spec(spec_arg);
            ToleranceConfig tol = make_tol(s.body);
            Vector dir;
            if (!direction_csv.empty()) {
                dir = parse_vector(direction_csv, s.body.dim);
            } else if (!std::isnan(boundary_angle)) {
                if (s.body.dim != 2)
                    throw InvalidInput("--boundary-angle applies to 2-D bodies only");
                dir = Vector(2);
                dir << std::cos(boundary_angle), std::sin(boundary_angle);
            } else {
                throw InvalidInput("periodic4 needs --direction or --boundary-angle");
            }
            BoundaryPoint x = char_boundary_point(s.body, dir, tol);
            FourPeriodicReport rep = four_periodic_defects(s.body, x, tol);
            json j;
            j["body_hash"] = s.hash;
            json verts = json::array();
            for (const Vector& zv : rep.vertices) {
                json row = json::array();
                for (int i = 0; i < zv.size(); ++i) row.push_back(zv[i]);
                verts.push_back(row);
            }
            j["vertices"] = verts;
            j["edge_defects"] = {rep.edge_defects[0], rep.edge_defects[1], rep.edge_defects[2],
                                 rep.edge_defects[3]};
            j["symplectic_area"] = rep.symplectic_area;
            j["symmetry_defect"] = rep.symmetry_defect;
            emit(j.dump(2), output);
        } else if (*hyp_cmd) {
            SpecArg s = realize_spec(spec_arg);
            ToleranceConfig tol = make_tol(s.body);
            const double pass_tol = s.body.numeric ? 1e-5 : 1e-7;
            Rng rng(seed);
            json j;
            if (check_name == "invariance") {
                double worst = 0.0;
                for (const BoundaryPoint& bp : sample_boundary(s.body, samples, seed, tol)) {
                    BoundaryPoint q = bp;
                    q.fvec = apply_J(bp.grad);
                    worst = std::max(worst, invariance_defect(s.body, q, tol));
                }
                j = check_entry("invariance", s.hash, samples, worst, worst <= pass_tol);
            } else if (check_name == "star") {
                StarShapeReport rep = star_shape_check(s.body, samples, seed, tol);
                j = check_entry("star", s.hash, samples,
                                s.body.dim == 2 ? rep.monotonicity_defect
                                                : double(rep.ray_multiplicity),
                                rep.pass);
                if (s.body.dim > 2) j["min_jacobian_sv"] = rep.min_jacobian_sv;
            } else if (check_name == "two-point") {
                const int lines = std::min(samples, 100);
                HypersurfaceSample cache;
                const HypersurfaceSample* cache_ptr = nullptr;
                if (s.body.dim == 2) {
                    cache = sample_Y(s.body, 20000, seed, tol);
                    cache_ptr = &cache;
                }
                double worst = 0.0;
                int bad = 0;
                for (const BoundaryPoint& bp : sample_boundary(s.body, lines, seed, tol)) {
                    BoundaryPoint q = bp;
                    q.fvec = apply_J(bp.grad);
                    LineCrossings lc = line_two_point_check(s.body, q, {}, tol, cache_ptr);
                    if (lc.count != 2) {
                        ++bad;
                        continue;
                    }
                    worst = std::max({worst, std::abs(std::abs(lc.ts[0]) - 1.0),
                                      std::abs(std::abs(lc.ts[1]) - 1.0)});
                }
                j = check_entry("two-point", s.hash, lines, worst, bad == 0 && worst <= 1e-6);
                j["wrong_counts"] = bad;
            } else if (check_name == "transversality") {
                double worst = std::numeric_limits<double>::infinity();
                for (const BoundaryPoint& bp : sample_boundary(s.body, samples, seed, tol))
                    worst = std::min(worst, radial_transversality(s.body, bp, tol));
                j = check_entry("transversality", s.hash, samples, worst, worst > 1e-3);
            } else if (check_name == "planarity") {
                // survey several starts: the characteristic flow of a nearly
                // round body only shows a defect where it crosses the
                // non-ball region, so one random start can miss it
                std::vector<Vector> starts;
                starts.push_back(Vector::Ones(s.body.dim).normalized());
                starts.push_back(apply_J(starts.front()));
                for (int k = 0; k < 6; ++k) starts.push_back(rng.direction(s.body.dim));
                PlanarityReport worst;
                json per_start = json::array();
                for (const Vector& v : starts) {
                    PlanarityReport rep =
                        planarity_defect(s.body, char_boundary_point(s.body, v, tol), 6.3, 400, tol);
                    per_start.push_back(
                        json{{"gamma_defect", rep.gamma_defect},
                             {"delta_char_defect", rep.delta_char_defect}});
                    worst.gamma_defect = std::max(worst.gamma_defect, rep.gamma_defect);
                    worst.delta_char_defect =
                        std::max(worst.delta_char_defect, rep.delta_char_defect);
                }
                j = check_entry("planarity", s.hash, static_cast<long long>(starts.size()),
                                worst.delta_char_defect, true);
                j["gamma_defect"] = worst.gamma_defect;
                j["delta_char_defect"] = worst.delta_char_defect;
                j["per_start"] = per_start;
            } else {
                throw InvalidInput("unknown check '" + check_name + "'");
            }
            emit(j.dump(2), output);
            if (!j["pass"].get<bool>()) return 3;
        } else if (*rec_cmd) {
            PlanarCurve y = read_curve_csv(y_curve_path);
            PlanarCurve rec = area_construction_2d(y);
            write_curve_csv(output, rec);
            json j;
            j["input_vertices"] = static_cast<long long>(y.vertices.size());
            j["enclosed_area"] = shoelace_area(y);
            if (!truth_spec.empty()) {
                SpecArg s = realize_spec(truth_spec);
                j["hausdorff_vs_truth"] = radial_sup_distance(rec, s.body);
                j["truth_hash"] = s.hash;
            }
            std::cout << j.dump(2) << "\n";
        } else if (*ver_cmd) {
            SpecArg s = realize_spec(spec_arg);
            json report = run_verify(s, level, seed, make_tol(s.body));
            emit(report.dump(2), output);
            if (!report["pass"].get<bool>()) return 3;
        } else if (*vol_cmd) {
            SpecArg s = realize_spec(spec_arg);
            MahlerReport rep = mahler_diagnostic(s.body, mc_n, seed);
            json j;
            j["body_hash"] = s.hash;
            j["value"] = rep.estimate.value;
            j["stderr"] = rep.estimate.stderr_;
            j["n"] = rep.estimate.n_samples;
            j["seed"] = seed;
            j["method"] = rep.estimate.method;
            j["volume_bound"] = rep.bound;
            j["margin_sigmas"] = rep.margin_sigmas;
            j["conjecture_violating"] = rep.margin_sigmas < 0.0;
            emit(j.dump(2), output);
        }
    } catch (const GateFailure& e) {
        json err;
        err["error"] = e.what();
        err["metric"] = e.metric;
        err["value"] = e.value;
        std::cerr << err.dump(2) << "\n";
        return 3;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << " (best " << e.best_value << ", residual "
                  << e.residual << ")\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
