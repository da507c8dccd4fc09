#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "uporo/mesh.hpp"

namespace uporo {

using Vec2 = std::array<double, 2>;
using VectorField2 = std::function<Vec2(double, double)>;

/// Conforming quadratic vector elements for the displacement. Each mesh
/// rectangle is split into two triangles along the lower-left/upper-right
/// diagonal; degrees of freedom sit at vertices and edge midpoints, two
/// components each. Fixed sides clamp both components, roller sides clamp
/// the normal component.
class DisplacementSpace {
 public:
  explicit DisplacementSpace(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int node_count() const { return int(nodes_.size()); }
  int triangle_count() const { return int(tris_.size()); }
  int dof_count() const { return 2 * node_count(); }
  int free_count() const { return n_free_; }

  const Vec2& node(int i) const { return nodes_[i]; }
  const std::array<int, 6>& triangle(int t) const { return tris_[t]; }
  int triangle_cell(int t) const { return tri_cell_[t]; }
  bool dof_constrained(int dof) const { return constrained_[dof] != 0; }
  int full_to_free(int dof) const { return full_to_free_[dof]; }
  int free_to_full(int fdof) const { return free_to_full_[fdof]; }

  /// Scatter a free-dof vector into a full vector with zeros on constraints.
  Eigen::VectorXd expand(const Eigen::VectorXd& free) const;
  /// Gather the free components of a full vector.
  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
  /// Nodal interpolation of a smooth field, constraints untouched.
  Eigen::VectorXd interpolate(const VectorField2& u) const;

  /// Boundary edges (pairs of vertex nodes + midpoint) per mesh face index,
  /// used for traction assembly.
  struct BoundaryEdge {
    int face;          // mesh face index
    std::array<int, 3> nodes;  // endpoint, endpoint, midpoint
  };
  const std::vector<BoundaryEdge>& boundary_edges() const { return bedges_; }

 private:
  const Mesh* mesh_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 6>> tris_;  // v0 v1 v2 m01 m12 m20
  std::vector<int> tri_cell_;
  std::vector<BoundaryEdge> bedges_;
  std::vector<uint8_t> constrained_;
  std::vector<int> full_to_free_, free_to_full_;
  int n_free_ = 0;
};

/// Stiffness of 2 mu (eps(u),eps(v)) + lambda (div u, div v) on free dofs.
/// Symmetric positive definite whenever some boundary is constrained.
Eigen::SparseMatrix<double> assemble_elastic(const DisplacementSpace& space,
                                             double mu, double lambda);

/// Divergence coupling B with B(K, j) = integral over cell K of div phi_j,
/// columns over free dofs.
Eigen::SparseMatrix<double> assemble_div_coupling(const DisplacementSpace& space);

/// Body load <f, v> over free dofs (order-4 triangle quadrature).
Eigen::VectorXd assemble_body_load(const DisplacementSpace& space,
                                   const VectorField2& f);

/// Surface load over Neumann-mechanics boundary edges: integral of
/// traction . v. The traction callback receives the side and position.
Eigen::VectorXd assemble_traction_load(
    const DisplacementSpace& space,
    const std::function<Vec2(Side, double, double)>& traction);

/// Riesz dual norm of a load vector with respect to the energy inner
/// product given by a prefactored elastic operator.
double dual_norm(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& A,
                 const Eigen::VectorXd& load);

/// Smallest nonzero generalized singular value of the divergence coupling on
/// cell-constant pressures: evidence for the inf-sup constant. Dense solve,
/// intended for small meshes.
double inf_sup_constant(const DisplacementSpace& space, double mu,
                        double lambda);

/// Negative control: the same quantity with the pressure space enlarged to
/// discontinuous linears per triangle (an unstable pairing).
double inf_sup_constant_p1disc(const DisplacementSpace& space, double mu,
                               double lambda);

}  // namespace uporo
