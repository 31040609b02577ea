#include "povmgeo/io.hpp"

namespace povmgeo {

namespace {

nlohmann::json vec_to_json(const Vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector<double> vec_from_json(const nlohmann::json& a) {
  Vector<double> v(a.size());
  for (Index i = 0; i < v.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

nlohmann::json mat_to_json(const Matrix<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i).transpose()));
  return rows;
}

Matrix<double> mat_from_json(const nlohmann::json& rows) {
  const Index r = rows.size();
  const Index c = r ? rows[0].size() : 0;
  Matrix<double> m(r, c);
  for (Index i = 0; i < r; ++i) m.row(i) = vec_from_json(rows[i]).transpose();
  return m;
}

}  // namespace

nlohmann::json basis_to_json(const MeasurementBasis<double>& basis) {
  nlohmann::json j;
  j["format"] = "povmgeo-basis-1";
  j["index_count"] = basis.size();
  j["effective_set"] = basis.effective_set();
  if (basis.removed_index()) j["removed_index"] = *basis.removed_index();
  j["condition_number"] = basis.condition_number();
  j["fock_dim"] = basis.fock_dim();
  j["g_cov"] = mat_to_json(basis.g_cov());
  j["g_contr"] = mat_to_json(basis.g_contr());
  nlohmann::json povm = nlohmann::json::array(), covm = nlohmann::json::array();
  for (Index n = 0; n < basis.size(); ++n) {
    nlohmann::json p;
    p["diag"] = vec_to_json(basis.povm(n).diag());
    p["hs_class"] = basis.povm(n).hs_class();
    if (basis.povm(n).hs_class()) p["tail_bound"] = basis.povm(n).tail_bound();
    povm.push_back(std::move(p));
    nlohmann::json c;
    c["diag"] = vec_to_json(basis.covm(n).diag());
    c["tail_bound"] = basis.covm(n).tail_bound();
    covm.push_back(std::move(c));
  }
  j["povm"] = std::move(povm);
  j["covm"] = std::move(covm);
  return j;
}

MeasurementBasis<double> basis_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "povmgeo-basis-1")
    throw std::runtime_error("basis_from_json: unknown format");
  std::vector<DiagonalOperator<double>> povm, covm;
  for (const auto& p : j.at("povm")) {
    Vector<double> d = vec_from_json(p.at("diag"));
    if (p.at("hs_class").get<bool>())
      povm.emplace_back(std::move(d), p.at("tail_bound").get<double>());
    else
      povm.push_back(DiagonalOperator<double>::non_hs(std::move(d)));
  }
  for (const auto& c : j.at("covm"))
    covm.emplace_back(vec_from_json(c.at("diag")), c.at("tail_bound").get<double>());
  std::optional<int> removed;
  if (j.contains("removed_index")) removed = j.at("removed_index").get<int>();
  return MeasurementBasis<double>(std::move(povm), std::move(covm),
                                  mat_from_json(j.at("g_cov")), mat_from_json(j.at("g_contr")),
                                  j.at("effective_set").get<std::vector<int>>(), removed,
                                  j.at("condition_number").get<double>());
}

}  // namespace povmgeo
