#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "aqlock/dataset.hpp"
#include "aqlock/error.hpp"

namespace aqlock::models::detail {

inline nlohmann::json matrix_to_json(const Matrix& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(a.cols()));
        for (Eigen::Index c = 0; c < a.cols(); ++c) row[static_cast<std::size_t>(c)] = a(r, c);
        rows.push_back(row);
    }
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", rows}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<std::vector<double>>>();
    if (static_cast<Eigen::Index>(data.size()) != rows) throw Error(ErrorKind::Parse, "matrix row count mismatch");
    Matrix a(rows, cols);
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (static_cast<Eigen::Index>(data[r].size()) != cols) throw Error(ErrorKind::Parse, "ragged matrix");
        for (std::size_t c = 0; c < data[r].size(); ++c) {
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r][c];
        }
    }
    return a;
}

inline nlohmann::json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const nlohmann::json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

inline nlohmann::json columns_to_json(const AffineColumns& c) { return {{"offset", c.offset}, {"scale", c.scale}}; }

inline AffineColumns columns_from_json(const nlohmann::json& j) {
    AffineColumns c;
    c.offset = j.at("offset").get<std::vector<double>>();
    c.scale = j.at("scale").get<std::vector<double>>();
    if (c.offset.size() != c.scale.size()) throw Error(ErrorKind::Parse, "scaling offset/scale length mismatch");
    return c;
}

}  // namespace aqlock::models::detail
