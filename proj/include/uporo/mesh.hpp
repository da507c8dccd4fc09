#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <string>
#include <vector>

namespace uporo {

/// Cell-wise constant scalar field. Length must equal the cell count of the
/// mesh it is used with; operations check this.
using CellField = Eigen::VectorXd;

enum class Side { left = 0, right = 1, bottom = 2, top = 3 };

enum class FlowBc { dirichlet, neumann };

/// Mechanics boundary kinds. `roller` constrains the normal displacement
/// component only (homogeneous), `fixed` clamps the full vector.
enum class MechBc { fixed, roller, neumann };

struct BoundaryConditions {
  std::array<FlowBc, 4> flow{FlowBc::dirichlet, FlowBc::dirichlet,
                             FlowBc::dirichlet, FlowBc::dirichlet};
  std::array<MechBc, 4> mech{MechBc::fixed, MechBc::fixed, MechBc::fixed,
                             MechBc::fixed};

  FlowBc flow_on(Side s) const { return flow[int(s)]; }
  MechBc mech_on(Side s) const { return mech[int(s)]; }
};

struct Cell {
  std::array<double, 2> center;
  double measure;
};

struct Face {
  int cell_in = -1;     // K
  int cell_out = -1;    // L, or -1 on the boundary
  double measure = 0;   // |sigma|
  double d_in = 0;      // distance from center of K to the face
  double d_out = 0;     // distance from center of L (0 on the boundary)
  double distance = 0;  // d_sigma = d_in + d_out
  double transmissibility = 0;  // |sigma| / d_sigma
  double dual_volume = 0;       // |P_sigma| = |sigma| d_sigma / dim
  std::array<double, 2> normal{0, 0};  // unit, K -> L or outward
  std::array<double, 2> center{0, 0};
  bool boundary = false;
  Side side = Side::left;        // meaningful when boundary
  FlowBc flow_bc = FlowBc::neumann;
  MechBc mech_bc = MechBc::neumann;
};

struct MeshStats {
  int nx, ny, cells, faces, interior_faces, boundary_faces;
  double regularity_constant;  // max_K sum_{sigma in E_K} |sigma| d_sigma / |K|
  double tau_min, tau_max;
  double dual_volume_total, domain_measure;
};

/// Orthogonal tensor-product mesh of axis-aligned rectangles: admissible for
/// two-point fluxes by construction. Immutable after construction.
class Mesh {
 public:
  Mesh() = default;  // empty; populate via the named constructors

  /// Uniform nx-by-ny grid on [0,Lx] x [0,Ly].
  static Mesh rectangular(int nx, int ny, double lx, double ly,
                          const BoundaryConditions& bc = {});
  /// Tensor-stretched grid from strictly increasing coordinate lines.
  static Mesh tensor(std::vector<double> xs, std::vector<double> ys,
                     const BoundaryConditions& bc = {});

  int dim() const { return 2; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cell_count() const { return int(cells_.size()); }
  int face_count() const { return int(faces_.size()); }
  const Cell& cell(int k) const { return cells_[k]; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<double>& x_lines() const { return xs_; }
  const std::vector<double>& y_lines() const { return ys_; }
  const BoundaryConditions& boundary_conditions() const { return bc_; }
  int cell_index(int i, int j) const { return j * nx_ + i; }

  double domain_measure() const;
  double diameter() const;  // diagonal of the bounding box

  /// Verifies center-face orthogonality, the dual-volume identity and the
  /// dual partition of the domain; throws std::logic_error on violation.
  void check_admissibility() const;

  MeshStats stats() const;

 private:
  int nx_ = 0, ny_ = 0;
  std::vector<double> xs_, ys_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  BoundaryConditions bc_;
};

/// Which exterior faces contribute jump terms to discrete norms and
/// gradients. The mixed-boundary variant restricts to Dirichlet-flow faces;
/// `all_exterior` treats every boundary face as if the field vanished
/// outside.
enum class BoundaryPolicy { dirichlet_flow, all_exterior };

/// Face-jump discrete H1 norm of a cell field.
double discrete_h1_norm(const Mesh& mesh, const CellField& q,
                        BoundaryPolicy policy = BoundaryPolicy::dirichlet_flow);

/// Weighted inner product of discrete gradients. The face weight is the
/// dual-volume average of the cell-wise weight: (d_K w_K + d_L w_L)/d_sigma
/// on interior faces, the one-sided value on boundary faces. Throws on a
/// non-positive weight.
double weighted_grad_inner(const Mesh& mesh, const CellField& a,
                           const CellField& b, const CellField& weight,
                           BoundaryPolicy policy = BoundaryPolicy::dirichlet_flow);

/// Sparse operator of the weighted form: (L q)_K = <grad_h q, grad_h 1_K>_w.
Eigen::SparseMatrix<double> tpfa_matrix(
    const Mesh& mesh, const CellField& weight,
    BoundaryPolicy policy = BoundaryPolicy::dirichlet_flow);

/// Piecewise-constant gradient on the dual (diamond) grid.
struct DualGradient {
  std::vector<std::array<double, 2>> value;  // one vector per face
  double l2_norm_sq = 0.0;                   // dual-volume weighted
};

DualGradient discrete_gradient(const Mesh& mesh, const CellField& q,
                               BoundaryPolicy policy = BoundaryPolicy::dirichlet_flow);

/// Two-point flux through one face, oriented K -> L (outward on boundary
/// Dirichlet faces, zero on Neumann faces which carry prescribed influx).
double tpfa_flux(const Mesh& mesh, const CellField& chi,
                 const CellField& weight, int face_index);

/// Face-averaged weight used by the flux and the weighted forms.
double face_weight(const Mesh& mesh, const CellField& weight, int face_index);

}  // namespace uporo
