#include "osb/bodies.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace osb {

using nlohmann::json;

namespace {

const char* type_name(BodySpec::Type t) {
    switch (t) {
        case BodySpec::Type::Ball: return "ball";
        case BodySpec::Type::LpBall: return "lp_ball";
        case BodySpec::Type::L2Sum: return "l2_sum";
        case BodySpec::Type::LagrangianSum: return "lagrangian_sum";
        case BodySpec::Type::SymplecticL2Sum: return "symplectic_l2_sum";
        case BodySpec::Type::LinearImage: return "linear_image";
        case BodySpec::Type::PatchedSelfPolar: return "patched_self_polar";
        case BodySpec::Type::NumericPolar: return "numeric_polar";
    }
    return "?";
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw InvalidInput(where + ": 'matrix' must be a non-empty array");
    // nested rows, or a flat row-major square array
    if (j[0].is_array()) {
        const int rows = static_cast<int>(j.size());
        const int cols = static_cast<int>(j[0].size());
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
                throw InvalidInput(where + ": ragged matrix rows");
            for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
        }
        return m;
    }
    const int total = static_cast<int>(j.size());
    const int side = static_cast<int>(std::lround(std::sqrt(double(total))));
    if (side * side != total)
        throw InvalidInput(where + ": flat matrix length " + std::to_string(total) +
                           " is not a perfect square");
    Matrix m(side, side);
    for (int i = 0; i < total; ++i) m(i / side, i % side) = j[i].get<double>();
    return m;
}

json spec_to_json(const BodySpec& s) {
    json j;
    j["type"] = type_name(s.type);
    switch (s.type) {
        case BodySpec::Type::Ball:
            j["dim"] = s.dim;
            break;
        case BodySpec::Type::LpBall:
            j["p"] = s.p;
            j["dim"] = s.dim;
            break;
        case BodySpec::Type::L2Sum:
        case BodySpec::Type::SymplecticL2Sum:
            j["left"] = spec_to_json(s.children[0]);
            j["right"] = spec_to_json(s.children[1]);
            break;
        case BodySpec::Type::LagrangianSum:
            j["k"] = spec_to_json(s.children[0]);
            break;
        case BodySpec::Type::LinearImage:
            j["inner"] = spec_to_json(s.children[0]);
            j["matrix"] = matrix_to_json(s.matrix);
            break;
        case BodySpec::Type::PatchedSelfPolar:
            j["n"] = s.n;
            j["epsilon"] = s.epsilon;
            j["delta"] = s.delta;
            j["seed"] = s.seed;
            break;
        case BodySpec::Type::NumericPolar:
            j["inner"] = spec_to_json(s.children[0]);
            break;
    }
    return j;
}

json require(const json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end()) throw InvalidInput(where + ": missing field '" + field + "'");
    return *it;
}

BodySpec spec_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw InvalidInput(where + ": expected a JSON object");
    const std::string type = require(j, "type", where).get<std::string>();
    BodySpec s;
    if (type == "ball") {
        s.type = BodySpec::Type::Ball;
        s.dim = require(j, "dim", where).get<int>();
        if (s.dim < 1) throw InvalidInput(where + ": ball dim must be >= 1");
    } else if (type == "lp_ball") {
        s.type = BodySpec::Type::LpBall;
        s.p = require(j, "p", where).get<double>();
        s.dim = require(j, "dim", where).get<int>();
        if (!(s.p > 1.0)) throw InvalidInput(where + ": lp_ball requires p > 1");
    } else if (type == "l2_sum" || type == "symplectic_l2_sum") {
        s.type = type == "l2_sum" ? BodySpec::Type::L2Sum : BodySpec::Type::SymplecticL2Sum;
        s.children.push_back(spec_from_json(require(j, "left", where), where + ".left"));
        s.children.push_back(spec_from_json(require(j, "right", where), where + ".right"));
    } else if (type == "lagrangian_sum") {
        s.type = BodySpec::Type::LagrangianSum;
        s.children.push_back(spec_from_json(require(j, "k", where), where + ".k"));
    } else if (type == "linear_image") {
        s.type = BodySpec::Type::LinearImage;
        s.children.push_back(spec_from_json(require(j, "inner", where), where + ".inner"));
        s.matrix = matrix_from_json(require(j, "matrix", where), where);
    } else if (type == "patched_self_polar") {
        s.type = BodySpec::Type::PatchedSelfPolar;
        s.n = require(j, "n", where).get<int>();
        s.epsilon = require(j, "epsilon", where).get<double>();
        s.delta = require(j, "delta", where).get<double>();
        s.seed = j.value("seed", std::uint64_t(0));
    } else if (type == "numeric_polar") {
        s.type = BodySpec::Type::NumericPolar;
        s.children.push_back(spec_from_json(require(j, "inner", where), where + ".inner"));
    } else {
        throw InvalidInput(where + ": unknown body type '" + type + "'");
    }
    return s;
}

}  // namespace

bool BodySpec::operator==(const BodySpec& other) const {
    if (type != other.type || dim != other.dim || p != other.p || n != other.n ||
        epsilon != other.epsilon || delta != other.delta || seed != other.seed ||
        children.size() != other.children.size())
        return false;
    if (matrix.rows() != other.matrix.rows() || matrix.cols() != other.matrix.cols()) return false;
    if (matrix.size() > 0 && matrix != other.matrix) return false;
    for (std::size_t i = 0; i < children.size(); ++i)
        if (!(children[i] == other.children[i])) return false;
    return true;
}

BodySpec BodySpec::ball(int dim) {
    BodySpec s;
    s.type = Type::Ball;
    s.dim = dim;
    return s;
}
BodySpec BodySpec::lp_ball(double p, int dim) {
    BodySpec s;
    s.type = Type::LpBall;
    s.p = p;
    s.dim = dim;
    return s;
}
BodySpec BodySpec::l2_sum(BodySpec left, BodySpec right) {
    BodySpec s;
    s.type = Type::L2Sum;
    s.children = {std::move(left), std::move(right)};
    return s;
}
BodySpec BodySpec::lagrangian_sum(BodySpec k) {
    BodySpec s;
    s.type = Type::LagrangianSum;
    s.children = {std::move(k)};
    return s;
}
BodySpec BodySpec::symplectic_l2_sum(BodySpec left, BodySpec right) {
    BodySpec s;
    s.type = Type::SymplecticL2Sum;
    s.children = {std::move(left), std::move(right)};
    return s;
}
BodySpec BodySpec::linear_image(BodySpec inner, Matrix m) {
    BodySpec s;
    s.type = Type::LinearImage;
    s.children = {std::move(inner)};
    s.matrix = std::move(m);
    return s;
}
BodySpec BodySpec::patched(int n, double epsilon, double delta, std::uint64_t seed) {
    BodySpec s;
    s.type = Type::PatchedSelfPolar;
    s.n = n;
    s.epsilon = epsilon;
    s.delta = delta;
    s.seed = seed;
    return s;
}
BodySpec BodySpec::numeric_polar(BodySpec inner) {
    BodySpec s;
    s.type = Type::NumericPolar;
    s.children = {std::move(inner)};
    return s;
}

BodySpec parse_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("parse_spec: ") + e.what());
    }
    if (!j.is_object()) throw InvalidInput("parse_spec: top level must be an object");
    if (j.contains("v") && j["v"].get<int>() != 1)
        throw InvalidInput("parse_spec: unsupported version " + j["v"].dump() + " (expected 1)");
    return spec_from_json(j, "spec");
}

std::string serialize_spec(const BodySpec& spec) {
    json j = spec_to_json(spec);
    j["v"] = 1;
    return j.dump();
}

int spec_dim(const BodySpec& s) {
    switch (s.type) {
        case BodySpec::Type::Ball:
            return s.dim;
        case BodySpec::Type::LpBall:
            return s.dim;
        case BodySpec::Type::L2Sum:
        case BodySpec::Type::SymplecticL2Sum:
            return spec_dim(s.children[0]) + spec_dim(s.children[1]);
        case BodySpec::Type::LagrangianSum:
            return 2 * spec_dim(s.children[0]);
        case BodySpec::Type::LinearImage: {
            int d = spec_dim(s.children[0]);
            if (s.matrix.rows() != d || s.matrix.cols() != d)
                throw InvalidInput("spec: linear_image matrix must be " + std::to_string(d) + "x" +
                                   std::to_string(d));
            return d;
        }
        case BodySpec::Type::PatchedSelfPolar:
            return 2 * s.n;
        case BodySpec::Type::NumericPolar:
            return spec_dim(s.children[0]);
    }
    throw InvalidInput("spec: unreachable type");
}

bool polar_spec(const BodySpec& s, BodySpec& out) {
    switch (s.type) {
        case BodySpec::Type::Ball:
            out = s;
            return true;
        case BodySpec::Type::LpBall:
            out = BodySpec::lp_ball(s.p / (s.p - 1.0), s.dim);
            return true;
        case BodySpec::Type::L2Sum: {
            BodySpec l, r;
            if (!polar_spec(s.children[0], l) || !polar_spec(s.children[1], r)) return false;
            out = BodySpec::l2_sum(std::move(l), std::move(r));
            return true;
        }
        case BodySpec::Type::SymplecticL2Sum: {
            BodySpec l, r;
            if (!polar_spec(s.children[0], l) || !polar_spec(s.children[1], r)) return false;
            out = BodySpec::symplectic_l2_sum(std::move(l), std::move(r));
            return true;
        }
        case BodySpec::Type::LagrangianSum: {
            // (K + K°)° = K° + K, which is the Lagrangian sum of K°
            BodySpec kp;
            if (!polar_spec(s.children[0], kp)) return false;
            out = BodySpec::lagrangian_sum(std::move(kp));
            return true;
        }
        case BodySpec::Type::LinearImage: {
            BodySpec ip;
            if (!polar_spec(s.children[0], ip)) return false;
            Eigen::FullPivLU<Matrix> lu(s.matrix);
            if (!lu.isInvertible()) throw InvalidInput("spec: linear_image matrix is singular");
            out = BodySpec::linear_image(std::move(ip), lu.inverse().transpose());
            return true;
        }
        case BodySpec::Type::NumericPolar:
            out = s.children[0];  // bipolar
            return true;
        case BodySpec::Type::PatchedSelfPolar:
            return false;
    }
    return false;
}

namespace {

ConvexBody realize_node(const BodySpec& s, bool allow_1d) {
    switch (s.type) {
        case BodySpec::Type::Ball:
            if (s.dim == 1) {
                if (!allow_1d)
                    throw InvalidInput("realize: standalone 1-D bodies are rejected; "
                                       "intervals are l2-sum ingredients only");
                return make_interval(1.0);
            }
            return make_ball(s.dim);
        case BodySpec::Type::LpBall:
            return make_lp_ball(s.p, s.dim);
        case BodySpec::Type::L2Sum:
            return make_l2_sum(realize_node(s.children[0], true), realize_node(s.children[1], true));
        case BodySpec::Type::LagrangianSum: {
            ConvexBody k = realize_node(s.children[0], true);
            BodySpec kp_spec;
            if (polar_spec(s.children[0], kp_spec))
                return make_lagrangian_sum_with_polar(k, realize_node(kp_spec, true));
            return make_lagrangian_sum_with_polar(k, numeric_polar(k));
        }
        case BodySpec::Type::SymplecticL2Sum:
            return make_symplectic_l2_sum(realize_node(s.children[0], false),
                                          realize_node(s.children[1], false));
        case BodySpec::Type::LinearImage:
            return make_linear_image(realize_node(s.children[0], allow_1d), s.matrix);
        case BodySpec::Type::PatchedSelfPolar:
            return make_patched_selfpolar(s.n, s.epsilon, s.delta, s.seed);
        case BodySpec::Type::NumericPolar: {
            BodySpec p;
            if (polar_spec(s.children[0], p)) return realize_node(p, allow_1d);
            return numeric_polar(realize_node(s.children[0], allow_1d));
        }
    }
    throw InvalidInput("realize: unreachable type");
}

}  // namespace

ConvexBody realize(const BodySpec& spec) {
    const int d = spec_dim(spec);
    if (d < 2 || d % 2 != 0)
        throw InvalidInput("realize: body dimension must be even and >= 2, got " +
                           std::to_string(d));
    return realize_node(spec, false);
}

std::string spec_hash(const BodySpec& spec) {
    const std::string text = serialize_spec(spec);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace osb
