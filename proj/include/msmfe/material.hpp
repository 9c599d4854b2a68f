#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

namespace msmfe {

using ScalarCoef = std::function<double(const Eigen::Vector2d&)>;
using TensorCoef = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;
using ScalarField = std::function<double(const Eigen::Vector2d&, double)>;   // (x, t)
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)>;

/// Physical coefficients. Coefficient evaluators must be pure functions so
/// assembly may evaluate them concurrently.
struct MaterialModel {
  ScalarCoef mu;       // Lame mu > 0
  ScalarCoef lambda;   // Lame lambda >= 0
  TensorCoef permeability;  // K, symmetric positive definite
  double c0 = 0.0;     // mass storativity, c0 = 0 allowed
  double alpha = 1.0;  // Biot-Willis constant in (0, 1]
};

/// Isotropic compliance A sigma = 1/(2 mu) (sigma - lambda/(2 mu + 2 lambda) tr(sigma) I),
/// extended to non-symmetric inputs by the same formula.
Eigen::Matrix2d compliance_apply(const MaterialModel& model, const Eigen::Matrix2d& sigma,
                                 const Eigen::Vector2d& x);

/// mu = E / (2 (1 + nu)), lambda = E nu / ((1 + nu)(1 - 2 nu)); requires -1 < nu < 1/2.
std::pair<double, double> lame_from_young_poisson(double E, double nu);

/// Exact 2x2 inverse of K(x); rejects nearly singular tensors.
Eigen::Matrix2d perm_inverse(const MaterialModel& model, const Eigen::Vector2d& x);

/// Named material presets used by the built-in experiments.
MaterialModel material_preset(const std::string& name);  // "example2", "example3", "example4"

/// Sources, boundary data and the boundary partition for one run. Every
/// boundary tag must appear in exactly one map of each split (displacement /
/// traction and pressure / normal flux).
struct SourceData {
  VectorField body_force;                                // f
  ScalarField fluid_source;                              // q
  std::map<std::string, VectorField> dirichlet_displacement;  // g_u (natural for stress)
  std::map<std::string, VectorField> traction;                // sigma.n (essential)
  std::map<std::string, ScalarField> dirichlet_pressure;      // g_p (natural for velocity)
  std::map<std::string, ScalarField> normal_flux;             // z.n (essential)
  ScalarField initial_pressure;                          // p0
  bool zero_initial_state = false;  // start from the zero state instead of the
                                    // stationary projection of continuous data
  bool pure_neumann_pressure = false;      // acknowledge |Gamma_D^pres| = 0
  bool pure_neumann_displacement = false;  // acknowledge |Gamma_D^displ| = 0
};

/// Checks that the tags present in `mesh_tags` are fully and uniquely covered
/// by both boundary splits and that each split has Dirichlet part unless the
/// corresponding pure-Neumann flag is set. Throws on violation.
void validate_boundary_partition(const SourceData& data, const std::vector<std::string>& mesh_tags);

}  // namespace msmfe
