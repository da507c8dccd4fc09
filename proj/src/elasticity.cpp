#include "uporo/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace uporo {

namespace {

// P2 shape functions and reference gradients at barycentric (l0, l1, l2)
// with node order v0 v1 v2 m01 m12 m20.
void p2_basis(double l0, double l1, double l2, double N[6], double dN[6][2]) {
  N[0] = l0 * (2 * l0 - 1);
  N[1] = l1 * (2 * l1 - 1);
  N[2] = l2 * (2 * l2 - 1);
  N[3] = 4 * l0 * l1;
  N[4] = 4 * l1 * l2;
  N[5] = 4 * l2 * l0;
  // grad l0 = (-1,-1), grad l1 = (1,0), grad l2 = (0,1) in reference coords
  dN[0][0] = -(4 * l0 - 1);
  dN[0][1] = -(4 * l0 - 1);
  dN[1][0] = 4 * l1 - 1;
  dN[1][1] = 0;
  dN[2][0] = 0;
  dN[2][1] = 4 * l2 - 1;
  dN[3][0] = 4 * (l0 - l1);
  dN[3][1] = -4 * l1;
  dN[4][0] = 4 * l2;
  dN[4][1] = 4 * l1;
  dN[5][0] = -4 * l2;
  dN[5][1] = 4 * (l0 - l2);
}

// Six-point degree-4 triangle rule (barycentric points, weights sum to 1).
struct TriQp {
  double l0, l1, l2, w;
};
constexpr double kA = 0.445948490915965;
constexpr double kWa = 0.223381589678011;
constexpr double kB = 0.091576213509771;
constexpr double kWb = 0.109951743655322;
constexpr TriQp kTriRule[6] = {
    {1 - 2 * kA, kA, kA, kWa}, {kA, 1 - 2 * kA, kA, kWa},
    {kA, kA, 1 - 2 * kA, kWa}, {1 - 2 * kB, kB, kB, kWb},
    {kB, 1 - 2 * kB, kB, kWb}, {kB, kB, 1 - 2 * kB, kWb}};

// Three-point Gauss rule on [0,1].
constexpr double kEdgeX[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
constexpr double kEdgeW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct TriGeometry {
  double grad[6][2];  // physical gradients of the P2 basis at one qp
  double area;
};

// Physical gradients at a quadrature point for an affine triangle.
void physical_gradients(const Vec2& a, const Vec2& b, const Vec2& c,
                        const double dN[6][2], double grad[6][2],
                        double* area) {
  const double jxx = b[0] - a[0], jxy = c[0] - a[0];
  const double jyx = b[1] - a[1], jyy = c[1] - a[1];
  const double det = jxx * jyy - jxy * jyx;
  *area = 0.5 * std::abs(det);
  const double ixx = jyy / det, ixy = -jxy / det;
  const double iyx = -jyx / det, iyy = jxx / det;
  for (int i = 0; i < 6; ++i) {
    // J^{-T} times reference gradient
    grad[i][0] = ixx * dN[i][0] + iyx * dN[i][1];
    grad[i][1] = ixy * dN[i][0] + iyy * dN[i][1];
  }
}

int find_line(const std::vector<double>& lines, double v) {
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (std::abs(lines[i] - v) <= 1e-12 * std::max(1.0, std::abs(v)))
      return int(i);
  throw std::logic_error("displacement space: grid line lookup failed");
}

}  // namespace

DisplacementSpace::DisplacementSpace(const Mesh& mesh) : mesh_(&mesh) {
  const int nx = mesh.nx(), ny = mesh.ny();
  const auto& xs = mesh.x_lines();
  const auto& ys = mesh.y_lines();

  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  nodes_.resize(std::size_t(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) nodes_[vid(i, j)] = {xs[i], ys[j]};

  std::map<std::pair<int, int>, int> edge_mid;
  auto midpoint = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = edge_mid.find(key);
    if (it != edge_mid.end()) return it->second;
    const int id = int(nodes_.size());
    nodes_.push_back({0.5 * (nodes_[a][0] + nodes_[b][0]),
                      0.5 * (nodes_[a][1] + nodes_[b][1])});
    edge_mid.emplace(key, id);
    return id;
  };

  tris_.reserve(std::size_t(2) * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      // Diagonal v00 -> v11, consistent orientation across the mesh.
      auto add = [&](int a, int b, int c) {
        tris_.push_back({a, b, c, midpoint(a, b), midpoint(b, c), midpoint(c, a)});
        tri_cell_.push_back(mesh.cell_index(i, j));
      };
      add(v00, v10, v11);
      add(v00, v11, v01);
    }

  // Boundary edges carry the P2 trace nodes of each boundary mesh face.
  bedges_.reserve(2 * (nx + ny));
  for (int fidx = 0; fidx < mesh.face_count(); ++fidx) {
    const Face& f = mesh.face(fidx);
    if (!f.boundary) continue;
    int a, b;
    if (f.side == Side::left || f.side == Side::right) {
      const int i = (f.side == Side::left) ? 0 : nx;
      const int j = find_line(ys, f.center[1] - 0.5 * f.measure);
      a = vid(i, j);
      b = vid(i, j + 1);
    } else {
      const int j = (f.side == Side::bottom) ? 0 : ny;
      const int i = find_line(xs, f.center[0] - 0.5 * f.measure);
      a = vid(i, j);
      b = vid(i + 1, j);
    }
    bedges_.push_back({fidx, {a, b, midpoint(a, b)}});
  }

  // Constraints from the mechanics boundary tags.
  constrained_.assign(2 * nodes_.size(), 0);
  for (const BoundaryEdge& e : bedges_) {
    const Face& f = mesh.face(e.face);
    if (f.mech_bc == MechBc::neumann) continue;
    const bool normal_is_x = (f.side == Side::left || f.side == Side::right);
    for (int n : e.nodes) {
      if (f.mech_bc == MechBc::fixed) {
        constrained_[2 * n] = 1;
        constrained_[2 * n + 1] = 1;
      } else {  // roller: clamp the normal component
        constrained_[normal_is_x ? 2 * n : 2 * n + 1] = 1;
      }
    }
  }

  full_to_free_.assign(2 * nodes_.size(), -1);
  for (std::size_t d = 0; d < constrained_.size(); ++d)
    if (!constrained_[d]) {
      full_to_free_[d] = n_free_++;
      free_to_full_.push_back(int(d));
    }
  if (n_free_ == dof_count())
    throw std::invalid_argument(
        "displacement space: no constrained boundary, rigid modes present");
}

Eigen::VectorXd DisplacementSpace::expand(const Eigen::VectorXd& free) const {
  if (free.size() != n_free_)
    throw std::invalid_argument("expand: wrong free-dof length");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dof_count());
  for (int i = 0; i < n_free_; ++i) full[free_to_full_[i]] = free[i];
  return full;
}

Eigen::VectorXd DisplacementSpace::restrict_to_free(
    const Eigen::VectorXd& full) const {
  if (full.size() != dof_count())
    throw std::invalid_argument("restrict_to_free: wrong full length");
  Eigen::VectorXd v(n_free_);
  for (int i = 0; i < n_free_; ++i) v[i] = full[free_to_full_[i]];
  return v;
}

Eigen::VectorXd DisplacementSpace::interpolate(const VectorField2& u) const {
  Eigen::VectorXd full(dof_count());
  for (int n = 0; n < node_count(); ++n) {
    const Vec2 v = u(nodes_[n][0], nodes_[n][1]);
    full[2 * n] = v[0];
    full[2 * n + 1] = v[1];
  }
  return full;
}

Eigen::SparseMatrix<double> assemble_elastic(const DisplacementSpace& space,
                                             double mu, double lambda) {
  if (!(mu > 0.0) || lambda < 0.0)
    throw std::invalid_argument("assemble_elastic: need mu > 0, lambda >= 0");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(space.triangle_count()) * 144);
  double N[6], dN[6][2], grad[6][2], area;
  for (int t = 0; t < space.triangle_count(); ++t) {
    const auto& tri = space.triangle(t);
    double ke[12][12] = {};
    for (const TriQp& qp : kTriRule) {
      p2_basis(qp.l0, qp.l1, qp.l2, N, dN);
      physical_gradients(space.node(tri[0]), space.node(tri[1]),
                         space.node(tri[2]), dN, grad, &area);
      const double w = qp.w * area;
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c)
          for (int b = 0; b < 6; ++b)
            for (int d = 0; d < 2; ++d) {
              double val = mu * grad[a][d] * grad[b][c] +
                           lambda * grad[a][c] * grad[b][d];
              if (c == d)
                val += mu * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
              ke[2 * a + c][2 * b + d] += w * val;
            }
    }
    for (int a = 0; a < 6; ++a)
      for (int c = 0; c < 2; ++c) {
        const int I = space.full_to_free(2 * tri[a] + c);
        if (I < 0) continue;
        for (int b = 0; b < 6; ++b)
          for (int d = 0; d < 2; ++d) {
            const int J = space.full_to_free(2 * tri[b] + d);
            if (J < 0) continue;
            trip.emplace_back(I, J, ke[2 * a + c][2 * b + d]);
          }
      }
  }
  Eigen::SparseMatrix<double> A(space.free_count(), space.free_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::SparseMatrix<double> assemble_div_coupling(const DisplacementSpace& space) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(space.triangle_count()) * 12);
  double N[6], dN[6][2], grad[6][2], area;
  for (int t = 0; t < space.triangle_count(); ++t) {
    const auto& tri = space.triangle(t);
    const int cell = space.triangle_cell(t);
    double be[12] = {};
    for (const TriQp& qp : kTriRule) {
      p2_basis(qp.l0, qp.l1, qp.l2, N, dN);
      physical_gradients(space.node(tri[0]), space.node(tri[1]),
                         space.node(tri[2]), dN, grad, &area);
      const double w = qp.w * area;
      for (int a = 0; a < 6; ++a) {
        be[2 * a] += w * grad[a][0];
        be[2 * a + 1] += w * grad[a][1];
      }
    }
    for (int a = 0; a < 6; ++a)
      for (int c = 0; c < 2; ++c) {
        const int J = space.full_to_free(2 * tri[a] + c);
        if (J >= 0) trip.emplace_back(cell, J, be[2 * a + c]);
      }
  }
  Eigen::SparseMatrix<double> B(space.mesh().cell_count(), space.free_count());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

Eigen::VectorXd assemble_body_load(const DisplacementSpace& space,
                                   const VectorField2& f) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.free_count());
  double N[6], dN[6][2], grad[6][2], area;
  for (int t = 0; t < space.triangle_count(); ++t) {
    const auto& tri = space.triangle(t);
    for (const TriQp& qp : kTriRule) {
      p2_basis(qp.l0, qp.l1, qp.l2, N, dN);
      physical_gradients(space.node(tri[0]), space.node(tri[1]),
                         space.node(tri[2]), dN, grad, &area);
      const Vec2& a = space.node(tri[0]);
      const Vec2& b = space.node(tri[1]);
      const Vec2& c = space.node(tri[2]);
      const double x = qp.l0 * a[0] + qp.l1 * b[0] + qp.l2 * c[0];
      const double y = qp.l0 * a[1] + qp.l1 * b[1] + qp.l2 * c[1];
      const Vec2 fv = f(x, y);
      const double w = qp.w * area;
      for (int i = 0; i < 6; ++i)
        for (int comp = 0; comp < 2; ++comp) {
          const int I = space.full_to_free(2 * tri[i] + comp);
          if (I >= 0) load[I] += w * N[i] * fv[comp];
        }
    }
  }
  return load;
}

Eigen::VectorXd assemble_traction_load(
    const DisplacementSpace& space,
    const std::function<Vec2(Side, double, double)>& traction) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.free_count());
  for (const auto& e : space.boundary_edges()) {
    const Face& f = space.mesh().face(e.face);
    if (f.mech_bc != MechBc::neumann) continue;
    const Vec2& a = space.node(e.nodes[0]);
    const Vec2& b = space.node(e.nodes[1]);
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    for (int q = 0; q < 3; ++q) {
      const double s = kEdgeX[q];
      const double x = a[0] + s * (b[0] - a[0]);
      const double y = a[1] + s * (b[1] - a[1]);
      const Vec2 tv = traction(f.side, x, y);
      // Quadratic edge trace: endpoints and midpoint.
      const double sh[3] = {(1 - s) * (1 - 2 * s), s * (2 * s - 1),
                            4 * s * (1 - s)};
      const double w = kEdgeW[q] * len;
      for (int i = 0; i < 3; ++i)
        for (int comp = 0; comp < 2; ++comp) {
          const int I = space.full_to_free(2 * e.nodes[i] + comp);
          if (I >= 0) load[I] += w * sh[i] * tv[comp];
        }
    }
  }
  return load;
}

double dual_norm(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& A,
                 const Eigen::VectorXd& load) {
  if (load.size() == 0) return 0.0;
  const Eigen::VectorXd riesz = A.solve(load);
  const double sq = load.dot(riesz);
  return std::sqrt(std::max(sq, 0.0));
}

namespace {

double smallest_nonzero_gamma(const Eigen::MatrixXd& S,
                              const Eigen::MatrixXd& M) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, M);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("inf_sup: generalized eigensolve failed");
  const auto& ev = eig.eigenvalues();
  const double lmax = std::max(ev[ev.size() - 1], 0.0);
  const double drop = 1e-12 * std::max(lmax, 1e-300);
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > drop) return std::sqrt(ev[i]);
  return 0.0;
}

}  // namespace

double inf_sup_constant(const DisplacementSpace& space, double mu,
                        double lambda) {
  const auto A = assemble_elastic(space, mu, lambda);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("inf_sup: elastic operator not SPD");
  const auto B = assemble_div_coupling(space);
  const Eigen::MatrixXd Bt = Eigen::MatrixXd(B).transpose();
  const Eigen::MatrixXd X = chol.solve(Bt);
  const Eigen::MatrixXd S = Eigen::MatrixXd(B) * X;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(space.mesh().cell_count(),
                                            space.mesh().cell_count());
  for (int k = 0; k < space.mesh().cell_count(); ++k)
    M(k, k) = space.mesh().cell(k).measure;
  return smallest_nonzero_gamma(S, M);
}

double inf_sup_constant_p1disc(const DisplacementSpace& space, double mu,
                               double lambda) {
  const auto A = assemble_elastic(space, mu, lambda);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("inf_sup: elastic operator not SPD");

  const int nt = space.triangle_count();
  const int np = 3 * nt;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(np, space.free_count());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(np, np);
  double N[6], dN[6][2], grad[6][2], area;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = space.triangle(t);
    const Vec2& a = space.node(tri[0]);
    const Vec2& b = space.node(tri[1]);
    const Vec2& c = space.node(tri[2]);
    const double xc = (a[0] + b[0] + c[0]) / 3.0;
    const double yc = (a[1] + b[1] + c[1]) / 3.0;
    const double h = std::sqrt(std::abs((b[0] - a[0]) * (c[1] - a[1]) -
                                        (c[0] - a[0]) * (b[1] - a[1])));
    for (const TriQp& qp : kTriRule) {
      p2_basis(qp.l0, qp.l1, qp.l2, N, dN);
      physical_gradients(a, b, c, dN, grad, &area);
      const double x = qp.l0 * a[0] + qp.l1 * b[0] + qp.l2 * c[0];
      const double y = qp.l0 * a[1] + qp.l1 * b[1] + qp.l2 * c[1];
      const double qb[3] = {1.0, (x - xc) / h, (y - yc) / h};
      const double w = qp.w * area;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) M(3 * t + i, 3 * t + j) += w * qb[i] * qb[j];
        for (int n = 0; n < 6; ++n)
          for (int comp = 0; comp < 2; ++comp) {
            const int J = space.full_to_free(2 * tri[n] + comp);
            if (J >= 0) B(3 * t + i, J) += w * qb[i] * grad[n][comp];
          }
      }
    }
  }
  const Eigen::MatrixXd X = chol.solve(B.transpose());
  const Eigen::MatrixXd S = B * X;
  return smallest_nonzero_gamma(S, M);
}

}  // namespace uporo
