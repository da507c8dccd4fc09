#include "uporo/mesh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uporo {

namespace {

void require_cells(const Mesh& mesh, const CellField& q, const char* who) {
  if (q.size() != mesh.cell_count())
    throw std::invalid_argument(std::string(who) +
                                ": field length does not match cell count");
}

bool face_contributes(const Face& f, BoundaryPolicy policy) {
  if (!f.boundary) return true;
  if (policy == BoundaryPolicy::all_exterior) return true;
  return f.flow_bc == FlowBc::dirichlet;
}

}  // namespace

Mesh Mesh::rectangular(int nx, int ny, double lx, double ly,
                       const BoundaryConditions& bc) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("mesh: nx and ny must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("mesh: domain extents must be > 0");
  std::vector<double> xs(nx + 1), ys(ny + 1);
  for (int i = 0; i <= nx; ++i) xs[i] = lx * i / nx;
  for (int j = 0; j <= ny; ++j) ys[j] = ly * j / ny;
  return tensor(std::move(xs), std::move(ys), bc);
}

Mesh Mesh::tensor(std::vector<double> xs, std::vector<double> ys,
                  const BoundaryConditions& bc) {
  if (xs.size() < 2 || ys.size() < 2)
    throw std::invalid_argument("mesh: need at least one cell per direction");
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1]))
      throw std::invalid_argument("mesh: x coordinates must increase");
  for (std::size_t j = 0; j + 1 < ys.size(); ++j)
    if (!(ys[j] < ys[j + 1]))
      throw std::invalid_argument("mesh: y coordinates must increase");

  Mesh m;
  m.nx_ = int(xs.size()) - 1;
  m.ny_ = int(ys.size()) - 1;
  m.xs_ = std::move(xs);
  m.ys_ = std::move(ys);
  m.bc_ = bc;

  m.cells_.resize(std::size_t(m.nx_) * m.ny_);
  for (int j = 0; j < m.ny_; ++j)
    for (int i = 0; i < m.nx_; ++i) {
      Cell& c = m.cells_[m.cell_index(i, j)];
      c.center = {0.5 * (m.xs_[i] + m.xs_[i + 1]),
                  0.5 * (m.ys_[j] + m.ys_[j + 1])};
      c.measure = (m.xs_[i + 1] - m.xs_[i]) * (m.ys_[j + 1] - m.ys_[j]);
    }

  auto push_face = [&](Face f) {
    f.distance = f.d_in + f.d_out;
    f.transmissibility = f.measure / f.distance;
    f.dual_volume = f.measure * f.distance / 2.0;
    if (f.boundary) {
      f.flow_bc = bc.flow_on(f.side);
      f.mech_bc = bc.mech_on(f.side);
    }
    m.faces_.push_back(f);
  };

  // Vertical faces (normal along x).
  for (int j = 0; j < m.ny_; ++j) {
    const double hy = m.ys_[j + 1] - m.ys_[j];
    const double yc = 0.5 * (m.ys_[j] + m.ys_[j + 1]);
    for (int i = 0; i <= m.nx_; ++i) {
      Face f;
      f.measure = hy;
      f.center = {m.xs_[i], yc};
      if (i == 0) {
        f.cell_in = m.cell_index(0, j);
        f.d_in = m.cells_[f.cell_in].center[0] - m.xs_[0];
        f.normal = {-1.0, 0.0};
        f.boundary = true;
        f.side = Side::left;
      } else if (i == m.nx_) {
        f.cell_in = m.cell_index(m.nx_ - 1, j);
        f.d_in = m.xs_[m.nx_] - m.cells_[f.cell_in].center[0];
        f.normal = {1.0, 0.0};
        f.boundary = true;
        f.side = Side::right;
      } else {
        f.cell_in = m.cell_index(i - 1, j);
        f.cell_out = m.cell_index(i, j);
        f.d_in = m.xs_[i] - m.cells_[f.cell_in].center[0];
        f.d_out = m.cells_[f.cell_out].center[0] - m.xs_[i];
        f.normal = {1.0, 0.0};
      }
      push_face(f);
    }
  }
  // Horizontal faces (normal along y).
  for (int i = 0; i < m.nx_; ++i) {
    const double hx = m.xs_[i + 1] - m.xs_[i];
    const double xc = 0.5 * (m.xs_[i] + m.xs_[i + 1]);
    for (int j = 0; j <= m.ny_; ++j) {
      Face f;
      f.measure = hx;
      f.center = {xc, m.ys_[j]};
      if (j == 0) {
        f.cell_in = m.cell_index(i, 0);
        f.d_in = m.cells_[f.cell_in].center[1] - m.ys_[0];
        f.normal = {0.0, -1.0};
        f.boundary = true;
        f.side = Side::bottom;
      } else if (j == m.ny_) {
        f.cell_in = m.cell_index(i, m.ny_ - 1);
        f.d_in = m.ys_[m.ny_] - m.cells_[f.cell_in].center[1];
        f.normal = {0.0, 1.0};
        f.boundary = true;
        f.side = Side::top;
      } else {
        f.cell_in = m.cell_index(i, j - 1);
        f.cell_out = m.cell_index(i, j);
        f.d_in = m.ys_[j] - m.cells_[f.cell_in].center[1];
        f.d_out = m.cells_[f.cell_out].center[1] - m.ys_[j];
        f.normal = {0.0, 1.0};
      }
      push_face(f);
    }
  }
  m.check_admissibility();
  return m;
}

double Mesh::domain_measure() const {
  return (xs_.back() - xs_.front()) * (ys_.back() - ys_.front());
}

double Mesh::diameter() const {
  return std::hypot(xs_.back() - xs_.front(), ys_.back() - ys_.front());
}

void Mesh::check_admissibility() const {
  double dual_total = 0.0;
  for (const Face& f : faces_) {
    if (f.boundary) {
      dual_total += f.dual_volume;
      continue;
    }
    // Center connector must be orthogonal to the face: its tangential
    // component vanishes for tensor grids; verify against roundoff.
    const auto& a = cells_[f.cell_in].center;
    const auto& b = cells_[f.cell_out].center;
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double tangent_x = -f.normal[1], tangent_y = f.normal[0];
    const double cross = dx * tangent_x + dy * tangent_y;
    if (std::abs(cross) > 1e-12 * std::hypot(dx, dy))
      throw std::logic_error("mesh: center connector not orthogonal to face");
    if (std::abs(dx * f.normal[0] + dy * f.normal[1] - f.distance) >
        1e-12 * f.distance)
      throw std::logic_error("mesh: face distance inconsistent with centers");
    dual_total += f.dual_volume;
  }
  if (std::abs(dual_total - domain_measure()) > 1e-10 * domain_measure())
    throw std::logic_error("mesh: dual diamonds do not partition the domain");
}

MeshStats Mesh::stats() const {
  MeshStats s{};
  s.nx = nx_;
  s.ny = ny_;
  s.cells = cell_count();
  s.faces = face_count();
  s.tau_min = std::numeric_limits<double>::infinity();
  s.tau_max = 0.0;
  std::vector<double> per_cell(cells_.size(), 0.0);
  for (const Face& f : faces_) {
    if (f.boundary)
      ++s.boundary_faces;
    else
      ++s.interior_faces;
    s.tau_min = std::min(s.tau_min, f.transmissibility);
    s.tau_max = std::max(s.tau_max, f.transmissibility);
    s.dual_volume_total += f.dual_volume;
    if (!f.boundary) {
      per_cell[f.cell_in] += f.measure * f.distance;
      per_cell[f.cell_out] += f.measure * f.distance;
    }
  }
  s.regularity_constant = 0.0;
  for (std::size_t k = 0; k < cells_.size(); ++k)
    s.regularity_constant =
        std::max(s.regularity_constant, per_cell[k] / cells_[k].measure);
  s.domain_measure = domain_measure();
  return s;
}

double face_weight(const Mesh& mesh, const CellField& weight, int face_index) {
  require_cells(mesh, weight, "face_weight");
  const Face& f = mesh.face(face_index);
  double w;
  if (f.boundary) {
    w = weight[f.cell_in];  // the dual diamond lies in one cell
  } else {
    w = (f.d_in * weight[f.cell_in] + f.d_out * weight[f.cell_out]) /
        f.distance;
  }
  if (!(w > 0.0))
    throw std::invalid_argument("face_weight: weight must be uniformly positive");
  return w;
}

double discrete_h1_norm(const Mesh& mesh, const CellField& q,
                        BoundaryPolicy policy) {
  require_cells(mesh, q, "discrete_h1_norm");
  double acc = 0.0;
  for (const Face& f : mesh.faces()) {
    if (!face_contributes(f, policy)) continue;
    const double jump =
        f.boundary ? q[f.cell_in] : q[f.cell_in] - q[f.cell_out];
    acc += f.transmissibility * jump * jump;
  }
  return std::sqrt(acc);
}

double weighted_grad_inner(const Mesh& mesh, const CellField& a,
                           const CellField& b, const CellField& weight,
                           BoundaryPolicy policy) {
  require_cells(mesh, a, "weighted_grad_inner");
  require_cells(mesh, b, "weighted_grad_inner");
  double acc = 0.0;
  for (int i = 0; i < mesh.face_count(); ++i) {
    const Face& f = mesh.face(i);
    if (!face_contributes(f, policy)) continue;
    const double w = face_weight(mesh, weight, i);
    const double ja = f.boundary ? a[f.cell_in] : a[f.cell_in] - a[f.cell_out];
    const double jb = f.boundary ? b[f.cell_in] : b[f.cell_in] - b[f.cell_out];
    acc += f.transmissibility * w * ja * jb;
  }
  return acc;
}

Eigen::SparseMatrix<double> tpfa_matrix(const Mesh& mesh,
                                        const CellField& weight,
                                        BoundaryPolicy policy) {
  require_cells(mesh, weight, "tpfa_matrix");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * mesh.face_count());
  for (int i = 0; i < mesh.face_count(); ++i) {
    const Face& f = mesh.face(i);
    if (!face_contributes(f, policy)) continue;
    const double t = f.transmissibility * face_weight(mesh, weight, i);
    if (f.boundary) {
      trip.emplace_back(f.cell_in, f.cell_in, t);
    } else {
      trip.emplace_back(f.cell_in, f.cell_in, t);
      trip.emplace_back(f.cell_out, f.cell_out, t);
      trip.emplace_back(f.cell_in, f.cell_out, -t);
      trip.emplace_back(f.cell_out, f.cell_in, -t);
    }
  }
  Eigen::SparseMatrix<double> L(mesh.cell_count(), mesh.cell_count());
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

DualGradient discrete_gradient(const Mesh& mesh, const CellField& q,
                               BoundaryPolicy policy) {
  require_cells(mesh, q, "discrete_gradient");
  DualGradient g;
  g.value.assign(mesh.face_count(), {0.0, 0.0});
  const double d = mesh.dim();
  for (int i = 0; i < mesh.face_count(); ++i) {
    const Face& f = mesh.face(i);
    if (!face_contributes(f, policy)) continue;
    double coeff;
    if (f.boundary) {
      // Jump to the exterior homogeneous value along the inward normal,
      // i.e. d * q_K / d_sigma towards the cell.
      coeff = -d * q[f.cell_in] / f.distance;
    } else {
      coeff = d * (q[f.cell_out] - q[f.cell_in]) / f.distance;
    }
    g.value[i] = {coeff * f.normal[0], coeff * f.normal[1]};
    g.l2_norm_sq += f.dual_volume * coeff * coeff;
  }
  return g;
}

double tpfa_flux(const Mesh& mesh, const CellField& chi,
                 const CellField& weight, int face_index) {
  require_cells(mesh, chi, "tpfa_flux");
  const Face& f = mesh.face(face_index);
  if (f.boundary && f.flow_bc == FlowBc::neumann) return 0.0;
  const double w = face_weight(mesh, weight, face_index);
  const double upstream = chi[f.cell_in];
  const double downstream = f.boundary ? 0.0 : chi[f.cell_out];
  return f.transmissibility * w * (upstream - downstream);
}

}  // namespace uporo
