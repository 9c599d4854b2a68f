#include "msmfe/material.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

namespace msmfe {

Eigen::Matrix2d compliance_apply(const MaterialModel& model, const Eigen::Matrix2d& sigma,
                                 const Eigen::Vector2d& x) {
  const double mu = model.mu(x);
  const double lambda = model.lambda(x);
  const double factor = lambda / (2 * mu + 2 * lambda);
  return (sigma - factor * sigma.trace() * Eigen::Matrix2d::Identity()) / (2 * mu);
}

std::pair<double, double> lame_from_young_poisson(double E, double nu) {
  if (!(nu > -1.0) || !(nu < 0.5))
    throw std::invalid_argument("lame_from_young_poisson: nu must lie in (-1, 1/2)");
  return {E / (2 * (1 + nu)), E * nu / ((1 + nu) * (1 - 2 * nu))};
}

Eigen::Matrix2d perm_inverse(const MaterialModel& model, const Eigen::Vector2d& x) {
  Eigen::Matrix2d K = model.permeability(x);
  const double det = K.determinant();
  if (std::abs(det) < 1e-300) throw std::runtime_error("perm_inverse: singular permeability");
  Eigen::Matrix2d inv;
  inv << K(1, 1), -K(0, 1), -K(1, 0), K(0, 0);
  return inv / det;
}

MaterialModel material_preset(const std::string& name) {
  MaterialModel m;
  if (name == "example2") {
    const double nu = 0.2;
    m.mu = [nu](const Eigen::Vector2d& x) {
      const double E = std::sin(5 * M_PI * x.x()) * std::sin(5 * M_PI * x.y()) + 5.0;
      return E / (2 * (1 + nu));
    };
    m.lambda = [nu](const Eigen::Vector2d& x) {
      const double E = std::sin(5 * M_PI * x.x()) * std::sin(5 * M_PI * x.y()) + 5.0;
      return E * nu / ((1 + nu) * (1 - 2 * nu));
    };
    m.permeability = [](const Eigen::Vector2d& x) {
      Eigen::Matrix2d K;
      const double sxy = std::sin(x.x() * x.y());
      K << (x.x() + 1) * (x.x() + 1) + x.y() * x.y(), sxy, sxy, (x.x() + 1) * (x.x() + 1);
      return K;
    };
    m.c0 = 1e-5;
    m.alpha = 1.0;
    return m;
  }
  if (name == "example3") {
    auto [mu, lambda] = lame_from_young_poisson(3e4, 0.4995);
    m.mu = [mu](const Eigen::Vector2d&) { return mu; };
    m.lambda = [lambda](const Eigen::Vector2d&) { return lambda; };
    m.permeability = [](const Eigen::Vector2d&) {
      return Eigen::Matrix2d(1e-4 * Eigen::Matrix2d::Identity());
    };
    m.c0 = 1e-3;
    m.alpha = 1.0;
    return m;
  }
  if (name == "example4") {
    auto [mu, lambda] = lame_from_young_poisson(1e5, 0.4);
    m.mu = [mu](const Eigen::Vector2d&) { return mu; };
    m.lambda = [lambda](const Eigen::Vector2d&) { return lambda; };
    m.permeability = [](const Eigen::Vector2d&) {
      return Eigen::Matrix2d(1e-7 * Eigen::Matrix2d::Identity());
    };
    m.c0 = 0.0;
    m.alpha = 0.93;
    return m;
  }
  throw std::invalid_argument("material_preset: unknown preset " + name);
}

void validate_boundary_partition(const SourceData& data, const std::vector<std::string>& mesh_tags) {
  std::set<std::string> tags;
  for (const auto& t : mesh_tags)
    if (!t.empty()) tags.insert(t);
  for (const auto& t : tags) {
    const int in_displ = data.dirichlet_displacement.count(t) + data.traction.count(t);
    const int in_pres = data.dirichlet_pressure.count(t) + data.normal_flux.count(t);
    if (in_displ != 1)
      throw std::runtime_error("boundary tag '" + t +
                               "' must appear in exactly one of displacement/traction");
    if (in_pres != 1)
      throw std::runtime_error("boundary tag '" + t +
                               "' must appear in exactly one of pressure/flux");
  }
  bool has_displ = false, has_pres = false;
  for (const auto& t : tags) {
    has_displ |= data.dirichlet_displacement.count(t) > 0;
    has_pres |= data.dirichlet_pressure.count(t) > 0;
  }
  if (!has_displ && !data.pure_neumann_displacement)
    throw std::runtime_error("no Dirichlet displacement boundary and run not flagged pure-Neumann");
  if (!has_pres && !data.pure_neumann_pressure)
    throw std::runtime_error("no Dirichlet pressure boundary and run not flagged pure-Neumann");
}

}  // namespace msmfe
