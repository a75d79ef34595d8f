#include "cellfa/model_io.hpp"

#include "cellfa/errors.hpp"

namespace cellfa {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) throw DataError(std::string("model json: bad ") + what);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(m.cols()))
      throw DataError(std::string("model json: ragged ") + what);
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& arr, const char* what) {
  if (!arr.is_array()) throw DataError(std::string("model json: bad ") + what);
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

json model_to_json(const FactorModel& model) {
  json doc;
  doc["schema"] = "cellfa-model/1";
  doc["n_variables"] = model.n_variables;
  doc["k"] = model.k;
  doc["rotation"] = rotation_name(model.rotation);
  doc["pattern"] = matrix_to_json(model.pattern);
  doc["phi"] = matrix_to_json(model.phi);
  doc["uniqueness"] = vector_to_json(model.uniqueness);
  doc["communality"] = vector_to_json(model.communality);
  doc["explained_variance"] = vector_to_json(model.explained_variance);
  doc["flags"] = {{"extraction_converged", model.extraction_converged},
                  {"extraction_iterations", model.extraction_iterations},
                  {"smc_fallback", model.smc_fallback},
                  {"heywood_adjusted", model.heywood_adjusted},
                  {"varimax_converged", model.varimax_converged},
                  {"varimax_sweeps", model.varimax_sweeps},
                  {"promax_fallback", model.promax_fallback}};
  return doc;
}

FactorModel model_from_json(const json& doc) {
  FactorModel model;
  model.n_variables = doc.at("n_variables").get<int>();
  model.k = doc.at("k").get<int>();
  std::string rot = doc.value("rotation", "none");
  model.rotation = rot == "promax"  ? Rotation::Promax
                   : rot == "varimax" ? Rotation::Varimax
                                      : Rotation::None;
  model.pattern = matrix_from_json(doc.at("pattern"), "pattern");
  model.phi = matrix_from_json(doc.at("phi"), "phi");
  model.uniqueness = vector_from_json(doc.at("uniqueness"), "uniqueness");
  model.communality = vector_from_json(doc.at("communality"), "communality");
  model.explained_variance = vector_from_json(doc.at("explained_variance"), "explained_variance");
  if (model.pattern.rows() != model.n_variables || model.pattern.cols() != model.k ||
      model.phi.rows() != model.k || model.phi.cols() != model.k)
    throw DataError("model json: inconsistent dimensions");
  if (doc.contains("flags")) {
    const json& f = doc["flags"];
    model.extraction_converged = f.value("extraction_converged", true);
    model.extraction_iterations = f.value("extraction_iterations", 0);
    model.smc_fallback = f.value("smc_fallback", false);
    model.heywood_adjusted = f.value("heywood_adjusted", false);
    model.varimax_converged = f.value("varimax_converged", true);
    model.varimax_sweeps = f.value("varimax_sweeps", 0);
    model.promax_fallback = f.value("promax_fallback", false);
  }
  return model;
}

}  // namespace cellfa
