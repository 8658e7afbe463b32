#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stoc/la.hpp"

namespace stoc {

/// Quadrature rule on the reference simplex; points in barycentric
/// coordinates (d+1 entries used), weights summing to 1/d!.
struct SimplexQuadrature {
  int dim = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;
};

/// Rule exact for polynomials up to the requested order, order in 1..5.
SimplexQuadrature simplex_quadrature(int dim, int order);

/// Structured simplicial decomposition of (0,1)^d, d in {1,2,3}:
/// intervals / 2 triangles per square / 6 tetrahedra per cube (Kuhn
/// subdivision). Homogeneous Dirichlet conditions are realized by the
/// interior-dof map; boundary vertices carry no dof.
class SimplicialMesh {
public:
  static SimplicialMesh structured(int dim, std::size_t cells_per_axis);

  int dim() const { return dim_; }
  std::size_t cells_per_axis() const { return n_; }
  double hx() const { return 1.0 / static_cast<double>(n_); }

  std::size_t num_vertices() const { return vertex_coords_.size(); }
  std::size_t num_simplices() const { return simplices_.size() / static_cast<std::size_t>(dim_ + 1); }
  std::size_t num_interior_dofs() const { return dof_to_vertex_.size(); }

  const std::array<double, 3>& vertex(std::size_t v) const { return vertex_coords_[v]; }
  std::span<const std::int32_t> simplex(std::size_t s) const {
    return {simplices_.data() + s * static_cast<std::size_t>(dim_ + 1), static_cast<std::size_t>(dim_ + 1)};
  }
  std::int64_t dof_of_vertex(std::size_t v) const { return vertex_to_dof_[v]; }
  std::size_t vertex_of_dof(std::size_t dof) const { return dof_to_vertex_[dof]; }

  double simplex_volume(std::size_t s) const;

private:
  int dim_ = 0;
  std::size_t n_ = 0;
  std::vector<std::array<double, 3>> vertex_coords_;
  std::vector<std::int32_t> simplices_;
  std::vector<std::int64_t> vertex_to_dof_;
  std::vector<std::size_t> dof_to_vertex_;
};

/// P1 stiffness on interior dofs. Throws on degenerate simplices.
SparseSymMatrix assemble_spatial_stiffness(const SimplicialMesh& mesh);
/// P1 mass on interior dofs.
SparseSymMatrix assemble_spatial_mass(const SimplicialMesh& mesh);

// Pre-elimination variants over all vertices (row-sum invariants, oracles).
SparseSymMatrix assemble_spatial_stiffness_full(const SimplicialMesh& mesh);
SparseSymMatrix assemble_spatial_mass_full(const SimplicialMesh& mesh);

/// Point evaluation of the interior-dof FE function; boundary vertices
/// contribute zero. Throws if x lies outside [0,1]^d.
double evaluate_fe_function(const SimplicialMesh& mesh, std::span<const double> dofs,
                            const std::array<double, 3>& x);

}  // namespace stoc
