#include "osb/measure.hpp"

#include "osb/rng.hpp"
#include "osb/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>
#include <vector>

namespace osb {

double shoelace_area(const PlanarCurve& curve) {
    const std::size_t n = curve.vertices.size();
    if (n < 3) throw InvalidInput("shoelace_area: need at least 3 vertices");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector2& a = curve.vertices[i];
        const Vector2& b = curve.vertices[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    return 0.5 * std::abs(s);
}

double symplectic_parallelogram_area(const Vector& z1, const Vector& z2, const Vector& z3,
                                     const Vector& z4) {
    const double scale = std::max({1.0, z1.norm(), z2.norm(), z3.norm(), z4.norm()});
    const double identity_defect = (z1 + z3 - z2 - z4).norm();
    if (identity_defect > 1e-9 * scale)
        throw InvalidInput("symplectic_parallelogram_area: vertices violate the parallelogram "
                           "identity z1+z3 = z2+z4 by " + std::to_string(identity_defect));
    return omega(Vector(z2 - z1), Vector(z4 - z1));
}

namespace {

int thread_budget() {
    if (const char* env = std::getenv("OSB_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

}  // namespace

VolumeEstimate mc_volume(const ConvexBody& body, long long n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InvalidInput("mc_volume: n_samples must be >= 1");
    const int d = body.dim;

    // bounding box from coordinate-direction radii, with validation
    double radius = 0.0;
    for (int i = 0; i < d; ++i) {
        Vector e = Vector::Zero(d);
        e[i] = 1.0;
        radius = std::max(radius, 1.0 / gauge(body, e));
        e[i] = -1.0;
        radius = std::max(radius, 1.0 / gauge(body, e));
    }
    radius *= 1.5;
    for (const BoundaryPoint& bp : sample_boundary(body, 2 * d + 32, seed ^ 0xb0b0ull))
        if (bp.x.cwiseAbs().maxCoeff() > radius)
            throw InvalidInput("mc_volume: bounding box validation failed (a boundary sample "
                               "escaped); body is not ball-like enough for the 1.5x heuristic");

    // fixed shard count: the estimate is a function of the seed only, never
    // of the thread count
    const int n_shards = 64;
    std::vector<long long> shard_n(n_shards, n_samples / n_shards);
    for (long long r = 0; r < n_samples % n_shards; ++r) ++shard_n[r];

    auto run_shard = [&](int shard) {
        Rng rng = Rng::fork(seed, static_cast<std::uint64_t>(shard));
        long long hits = 0;
        Vector p(d);
        for (long long i = 0; i < shard_n[shard]; ++i) {
            for (int c = 0; c < d; ++c) p[c] = rng.uniform(-radius, radius);
            if (body.gauge_fn(p) <= 1.0) ++hits;
        }
        return hits;
    };

    const int threads = std::min(thread_budget(), n_shards);
    long long hits = 0;
    if (threads <= 1) {
        for (int s = 0; s < n_shards; ++s) hits += run_shard(s);
    } else {
        std::vector<std::future<long long>> workers;
        workers.reserve(threads);
        for (int w = 0; w < threads; ++w)
            workers.push_back(std::async(std::launch::async, [&, w]() {
                long long sum = 0;
                for (int s = w; s < n_shards; s += threads) sum += run_shard(s);
                return sum;
            }));
        for (auto& f : workers) hits += f.get();
    }

    const double box = std::pow(2.0 * radius, d);
    const double frac = double(hits) / double(n_samples);
    VolumeEstimate est;
    est.value = box * frac;
    est.stderr_ = box * std::sqrt(std::max(0.0, frac * (1.0 - frac)) / double(n_samples));
    est.n_samples = n_samples;
    est.method = "monte_carlo";
    return est;
}

MahlerReport mahler_diagnostic(const ConvexBody& body, long long n_samples, std::uint64_t seed) {
    MahlerReport report;
    report.estimate = mc_volume(body, n_samples, seed);
    const int n = body.dim / 2;
    double bound = 1.0;
    for (int k = 1; k <= n; ++k) bound *= 2.0 / double(k);
    report.bound = bound;
    report.margin_sigmas =
        report.estimate.stderr_ > 0 ? (report.estimate.value - bound) / report.estimate.stderr_ : 0.0;
    return report;
}

}  // namespace osb
