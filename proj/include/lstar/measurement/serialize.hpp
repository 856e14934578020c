#pragma once

#include <lstar/core/dense.hpp>
#include <lstar/measurement/operator.hpp>
#include <lstar/measurement/scenario.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

// JSON documents for operators and scenarios. Matrices are flattened in
// row-major order. Doubles are written in shortest round-trip form, so a
// write/read cycle reproduces every value bit for bit.

namespace lstar {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& a) {
    json out = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.push_back(a(i, j));
    return out;
}

inline Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
        throw std::invalid_argument("matrix entry count does not match n1 * n2");
    Matrix a(rows, cols);
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) a(i, j2) = j.at(idx++).get<double>();
    return a;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

inline json operator_to_json(const MeasurementOperator& op) {
    json out;
    out["n1"] = op.rows();
    out["n2"] = op.cols();
    out["m"] = op.size();
    json mats = json::array();
    for (const auto& a : op.matrices()) mats.push_back(matrix_to_json(a));
    out["matrices"] = std::move(mats);
    return out;
}

inline MeasurementOperator operator_from_json(const json& j) {
    const auto n1 = j.at("n1").get<Eigen::Index>();
    const auto n2 = j.at("n2").get<Eigen::Index>();
    const auto m = j.at("m").get<Eigen::Index>();
    const json& mats = j.at("matrices");
    if (!mats.is_array() || static_cast<Eigen::Index>(mats.size()) != m)
        throw std::invalid_argument("operator JSON: 'matrices' must hold m entries");
    std::vector<Matrix> out;
    out.reserve(mats.size());
    for (const auto& a : mats) out.push_back(matrix_from_json(a, n1, n2));
    return MeasurementOperator(std::move(out));
}

inline json noise_to_json(const NoiseSpec& n) {
    json out;
    out["kind"] = to_string(n.kind);
    out["epsilon"] = n.epsilon;
    out["sigma"] = n.sigma;
    out["seed"] = n.seed;
    out["realized_w"] = vector_to_json(n.realized_w);
    return out;
}

inline NoiseSpec noise_from_json(const json& j) {
    NoiseSpec n;
    n.kind = noise_kind_from_string(j.at("kind").get<std::string>());
    n.epsilon = j.value("epsilon", 0.0);
    n.sigma = j.value("sigma", 0.0);
    n.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("realized_w")) n.realized_w = vector_from_json(j.at("realized_w"));
    return n;
}

inline json scenario_to_json(const MeasurementScenario& s,
                             std::optional<std::uint64_t> seed = std::nullopt) {
    json out = operator_to_json(s.op);
    out["x_true"] = matrix_to_json(s.x_true);
    out["y"] = vector_to_json(s.y);
    out["noise"] = noise_to_json(s.noise);
    if (seed) out["seed"] = *seed;
    return out;
}

inline MeasurementScenario scenario_from_json(const json& j) {
    MeasurementOperator op = operator_from_json(j);
    Vector y = vector_from_json(j.at("y"));
    if (y.size() != op.size()) throw std::invalid_argument("scenario JSON: y must hold m entries");
    Matrix x = j.contains("x_true") ? matrix_from_json(j.at("x_true"), op.rows(), op.cols())
                                    : Matrix::Zero(op.rows(), op.cols());
    NoiseSpec noise = j.contains("noise") ? noise_from_json(j.at("noise")) : NoiseSpec{};
    if (noise.realized_w.size() == 0) noise.realized_w = Vector::Zero(op.size());
    return {std::move(op), std::move(x), std::move(noise), std::move(y)};
}

} // namespace lstar
