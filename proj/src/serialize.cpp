#include "bergman/serialize.hpp"

#include <stdexcept>
#include <string>

namespace bergman {

using nlohmann::json;

namespace {

json header(const Mesh& m, const std::vector<double>& alpha_list) {
  return {{"depth", m.depth()}, {"mesh", m.is_overlay() ? "overlay" : "dyadic"}, {"alpha_list", alpha_list}};
}

MeshPtr mesh_from(const json& j) {
  for (const auto& [k, v] : j.items()) {
    if (k != "depth" && k != "mesh" && k != "alpha_list" && k != "values") {
      throw std::invalid_argument("mesh function: unknown field '" + k + "'");
    }
  }
  if (!j.contains("depth") || !j.contains("values")) {
    throw std::invalid_argument("mesh function: fields 'depth' and 'values' are required");
  }
  const int depth = j.at("depth").get<int>();
  const std::string kind = j.value("mesh", std::string("dyadic"));
  if (kind != "dyadic" && kind != "overlay") throw std::invalid_argument("mesh function: unknown mesh '" + kind + "'");
  const MeshPtr mesh = kind == "overlay" ? Mesh::overlay(depth) : Mesh::dyadic(depth);
  if (j.at("values").size() != mesh->size()) {
    throw std::invalid_argument("mesh function: expected " + std::to_string(mesh->size()) + " values");
  }
  return mesh;
}

}  // namespace

json to_json(const RealFunction& f, const std::vector<double>& alpha_list) {
  json j = header(f.mesh(), alpha_list);
  j["values"] = std::vector<double>(f.values().begin(), f.values().end());
  return j;
}

json to_json(const ComplexFunction& f, const std::vector<double>& alpha_list) {
  json j = header(f.mesh(), alpha_list);
  json v = json::array();
  for (const auto& z : f.values()) v.push_back({z.real(), z.imag()});
  j["values"] = v;
  return j;
}

RealFunction real_function_from_json(const json& j) {
  const MeshPtr mesh = mesh_from(j);
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->size()));
  for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = j.at("values").at(static_cast<std::size_t>(c)).get<double>();
  return RealFunction(mesh, std::move(v));
}

ComplexFunction complex_function_from_json(const json& j) {
  const MeshPtr mesh = mesh_from(j);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(mesh->size()));
  for (Eigen::Index c = 0; c < v.size(); ++c) {
    const json& z = j.at("values").at(static_cast<std::size_t>(c));
    v[c] = z.is_array() ? std::complex<double>(z.at(0).get<double>(), z.at(1).get<double>())
                        : std::complex<double>(z.get<double>(), 0.0);
  }
  return ComplexFunction(mesh, std::move(v));
}

}  // namespace bergman
