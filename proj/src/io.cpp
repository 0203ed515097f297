#include "ctmc/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ctmc::io {

namespace {

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw Error(ErrorKind::ParseError, fmt::format("{}: expected a number", where));
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, fmt::format("{}: non-finite value", where));
    return v;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ParseError, fmt::format("missing field '{}'", key));
    return j.at(key);
}

std::vector<std::string> labels(const Json& j, const char* key) {
    const auto& a = field(j, key);
    if (!a.is_array()) throw Error(ErrorKind::ParseError, fmt::format("'{}' must be an array", key));
    std::vector<std::string> out;
    for (const auto& v : a) {
        if (!v.is_string()) throw Error(ErrorKind::ParseError, fmt::format("'{}' entries must be strings", key));
        out.push_back(v.get<std::string>());
    }
    return out;
}

Vector vector_of(const Json& a, const std::string& where) {
    if (!a.is_array()) throw Error(ErrorKind::ParseError, fmt::format("{} must be an array", where));
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(a[i], where);
    return v;
}

Matrix matrix_of(const Json& a, const std::string& where) {
    if (!a.is_array()) throw Error(ErrorKind::ParseError, fmt::format("{} must be an array of rows", where));
    const auto rows = static_cast<Eigen::Index>(a.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(a[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Vector row = vector_of(a[static_cast<std::size_t>(i)], where);
        if (row.size() != cols) throw Error(ErrorKind::ParseError, fmt::format("{}: ragged rows", where));
        m.row(i) = row.transpose();
    }
    return m;
}

Json rows_of(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Json values_of(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json values_of(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
    return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot open {}", path.string()));
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseError, fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, fmt::format("cannot write {}", path.string()));
    out << text;
    if (!out) throw Error(ErrorKind::IoError, fmt::format("write failed for {}", path.string()));
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Generator generator_from_json(const Json& j) {
    StateSpace space(labels(j, "states"));
    Matrix rates = matrix_of(field(j, "rates"), "rates");
    if (rates.rows() != static_cast<Eigen::Index>(space.size()) || rates.cols() != rates.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "rates must be square and match the state list");
    }
    return validate_generator(std::move(rates), std::move(space));
}

Json to_json(const Generator& L) { return Json{{"states", L.space().labels()}, {"rates", rows_of(L.rates())}}; }

ProbabilityVector probability_from_json(const Json& j) {
    StateSpace space(labels(j, "states"));
    return ProbabilityVector::from_mass(std::move(space), vector_of(field(j, "mass"), "mass"));
}

Json to_json(const ProbabilityVector& p) { return Json{{"states", p.space().labels()}, {"mass", values_of(p.mass())}}; }

CoarseGrainingMap map_from_json(const Json& j) {
    StateSpace fine(labels(j, "fine"));
    StateSpace coarse(labels(j, "coarse"));
    const auto& a = field(j, "assignment");
    if (!a.is_object()) throw Error(ErrorKind::ParseError, "'assignment' must be an object");
    std::map<std::string, std::string> assignment;
    for (const auto& [key, value] : a.items()) {
        if (!value.is_string()) throw Error(ErrorKind::ParseError, "assignment values must be strings");
        assignment.emplace(key, value.get<std::string>());
    }
    return CoarseGrainingMap::from_labels(std::move(fine), std::move(coarse), assignment);
}

Json to_json(const CoarseGrainingMap& xi) {
    Json assignment = Json::object();
    for (std::size_t x = 0; x < xi.fine().size(); ++x) {
        assignment[xi.fine().label(x)] = xi.coarse().label(xi.image(x));
    }
    return Json{{"fine", xi.fine().labels()}, {"coarse", xi.coarse().labels()}, {"assignment", assignment}};
}

MultiscaleSpec multiscale_spec_from_json(const Json& j) {
    const auto& n_field = field(j, "n");
    if (!n_field.is_number_integer() || n_field.get<long long>() < 2) {
        throw Error(ErrorKind::ParseError, "'n' must be an integer >= 2");
    }
    const auto n = n_field.get<std::size_t>();
    auto q0 = validate_generator(matrix_of(field(j, "q0"), "q0"), StateSpace::indexed(n));
    auto q1 = validate_generator(matrix_of(field(j, "q1"), "q1"), StateSpace::indexed(n));
    MultiscaleSpec spec{n, {std::move(q0), std::move(q1)},
                        {matrix_of(field(j, "g01"), "g01"), matrix_of(field(j, "g10"), "g10")}, 1.0};
    if (j.contains("epsilon")) spec.epsilon = number(j.at("epsilon"), "epsilon");
    validate_spec(spec);
    return spec;
}

Json to_json(const MultiscaleSpec& spec) {
    return Json{{"n", spec.n},
                {"q0", rows_of(spec.q[0].rates())},
                {"q1", rows_of(spec.q[1].rates())},
                {"g01", rows_of(spec.g[0])},
                {"g10", rows_of(spec.g[1])},
                {"epsilon", spec.epsilon}};
}

Json to_json(const LsiEstimate& estimate) {
    return Json{{"alpha", estimate.alpha},
                {"witness", values_of(estimate.witness.mass())},
                {"method", to_string(estimate.method)},
                {"samples", estimate.samples}};
}

Json to_json(const BoundReport& report) {
    Json j;
    if (report.epsilon) {
        j["eps"] = *report.epsilon;
    } else {
        j["eps"] = nullptr;
    }
    j["grid"] = values_of(report.grid.points());
    j["lhs"] = values_of(report.lhs);
    j["rhs"] = values_of(report.rhs_eps ? *report.rhs_eps : report.rhs_general);
    j["rhs_general"] = values_of(report.rhs_general);
    j["g"] = values_of(report.g_values);
    j["g_l2"] = report.g_l2;
    j["alpha"] = report.alpha_used;
    j["start_time"] = report.start_time;
    j["sup_lhs"] = report.sup_lhs;
    j["t_argmax"] = report.t_argmax;
    j["verdict"] = report.all_true();
    j["verdict_points"] = report.verdict;
    if (report.envelope) {
        const auto& e = *report.envelope;
        j["envelope"] = Json{{"c1", values_of(e.c1)},
                             {"c2", e.c2},
                             {"c", e.c},
                             {"tv", values_of(e.tv)},
                             {"verdict", std::all_of(e.verdict.begin(), e.verdict.end(), [](bool v) { return v; })},
                             {"crossover", e.crossover ? Json(*e.crossover) : Json(nullptr)}};
    }
    j["notes"] = report.notes;
    return j;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t";
    for (const auto& label : traj.space().labels()) out += fmt::format(",\"{}\"", label);
    out += '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out += format_double(traj.time(k));
        for (Eigen::Index j = 0; j < traj.values().cols(); ++j) {
            out += ',';
            out += format_double(traj.values()(static_cast<Eigen::Index>(k), j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace ctmc::io
