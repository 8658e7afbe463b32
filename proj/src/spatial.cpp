#include "stoc/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stoc {

namespace {

struct GaussRule {
  std::vector<double> points;   // on [0,1]
  std::vector<double> weights;  // summing to 1
};

GaussRule gauss_legendre_unit(int npts) {
  // closed forms up to 5 points (degree 9)
  std::vector<double> x, w;
  switch (npts) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double a = std::sqrt((3.0 - 2.0 * std::sqrt(6.0 / 5.0)) / 7.0);
      const double b = std::sqrt((3.0 + 2.0 * std::sqrt(6.0 / 5.0)) / 7.0);
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("gauss_legendre_unit: unsupported point count");
  }
  GaussRule rule;
  for (int i = 0; i < npts; ++i) {
    rule.points.push_back(0.5 * (x[static_cast<std::size_t>(i)] + 1.0));
    rule.weights.push_back(0.5 * w[static_cast<std::size_t>(i)]);
  }
  return rule;
}

int gauss_points_for(int degree) { return (degree + 2) / 2; }

}  // namespace

SimplexQuadrature simplex_quadrature(int dim, int order) {
  if (order < 1 || order > 5) throw std::invalid_argument("simplex_quadrature: order must be in 1..5");
  SimplexQuadrature rule;
  rule.dim = dim;
  if (dim == 1) {
    const GaussRule g = gauss_legendre_unit(gauss_points_for(order));
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      rule.points.push_back({1.0 - g.points[q], g.points[q], 0.0, 0.0});
      rule.weights.push_back(g.weights[q]);
    }
    return rule;
  }
  if (dim == 2) {
    if (order == 1) {
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0});
      rule.weights.push_back(0.5);
      return rule;
    }
    if (order == 2) {
      rule.points.push_back({0.5, 0.5, 0.0, 0.0});
      rule.points.push_back({0.5, 0.0, 0.5, 0.0});
      rule.points.push_back({0.0, 0.5, 0.5, 0.0});
      rule.weights.assign(3, 1.0 / 6.0);
      return rule;
    }
    // collapsed (Duffy) tensor rule: x = u, y = v(1-u), jacobian (1-u);
    // polynomial degree p maps to degree p+1 in u and p in v
    const GaussRule gu = gauss_legendre_unit(gauss_points_for(order + 1));
    const GaussRule gv = gauss_legendre_unit(gauss_points_for(order));
    for (std::size_t i = 0; i < gu.points.size(); ++i)
      for (std::size_t j = 0; j < gv.points.size(); ++j) {
        const double u = gu.points[i];
        const double v = gv.points[j];
        const double x = u;
        const double y = v * (1.0 - u);
        rule.points.push_back({1.0 - x - y, x, y, 0.0});
        rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
      }
    return rule;
  }
  if (dim == 3) {
    if (order == 1) {
      rule.points.push_back({0.25, 0.25, 0.25, 0.25});
      rule.weights.push_back(1.0 / 6.0);
      return rule;
    }
    if (order == 2) {
      const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
      const double b = (5.0 - std::sqrt(5.0)) / 20.0;
      for (int corner = 0; corner < 4; ++corner) {
        std::array<double, 4> p = {b, b, b, b};
        p[static_cast<std::size_t>(corner)] = a;
        rule.points.push_back(p);
        rule.weights.push_back(1.0 / 24.0);
      }
      return rule;
    }
    const GaussRule gu = gauss_legendre_unit(gauss_points_for(order + 2));
    const GaussRule gv = gauss_legendre_unit(gauss_points_for(order + 1));
    const GaussRule gw = gauss_legendre_unit(gauss_points_for(order));
    for (std::size_t i = 0; i < gu.points.size(); ++i)
      for (std::size_t j = 0; j < gv.points.size(); ++j)
        for (std::size_t k = 0; k < gw.points.size(); ++k) {
          const double u = gu.points[i];
          const double v = gv.points[j];
          const double w = gw.points[k];
          const double x = u;
          const double y = v * (1.0 - u);
          const double z = w * (1.0 - u) * (1.0 - v);
          rule.points.push_back({1.0 - x - y - z, x, y, z});
          rule.weights.push_back(gu.weights[i] * gv.weights[j] * gw.weights[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
        }
    return rule;
  }
  throw std::invalid_argument("simplex_quadrature: dimension must be 1, 2 or 3");
}

SimplicialMesh SimplicialMesh::structured(int dim, std::size_t cells_per_axis) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("SimplicialMesh: dimension must be 1, 2 or 3");
  if (cells_per_axis < 2) throw std::invalid_argument("SimplicialMesh: need cells_per_axis >= 2 for an interior dof");

  SimplicialMesh mesh;
  mesh.dim_ = dim;
  mesh.n_ = cells_per_axis;
  const std::size_t n = cells_per_axis;
  const std::size_t nv1 = n + 1;
  const double h = 1.0 / static_cast<double>(n);

  std::size_t num_vertices = 1;
  for (int a = 0; a < dim; ++a) num_vertices *= nv1;
  mesh.vertex_coords_.resize(num_vertices);
  mesh.vertex_to_dof_.assign(num_vertices, -1);

  const std::size_t interior_per_axis = n - 1;
  for (std::size_t v = 0; v < num_vertices; ++v) {
    std::array<std::size_t, 3> idx = {0, 0, 0};
    std::size_t rest = v;
    for (int a = 0; a < dim; ++a) {
      idx[static_cast<std::size_t>(a)] = rest % nv1;
      rest /= nv1;
    }
    std::array<double, 3> x = {0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) x[static_cast<std::size_t>(a)] = static_cast<double>(idx[static_cast<std::size_t>(a)]) * h;
    mesh.vertex_coords_[v] = x;
    bool interior = true;
    for (int a = 0; a < dim; ++a)
      if (idx[static_cast<std::size_t>(a)] == 0 || idx[static_cast<std::size_t>(a)] == n) interior = false;
    if (interior) {
      std::size_t dof = 0;
      for (int a = dim - 1; a >= 0; --a) dof = dof * interior_per_axis + (idx[static_cast<std::size_t>(a)] - 1);
      mesh.vertex_to_dof_[v] = static_cast<std::int64_t>(dof);
    }
  }
  mesh.dof_to_vertex_.resize([&] {
    std::size_t c = 1;
    for (int a = 0; a < dim; ++a) c *= interior_per_axis;
    return c;
  }());
  for (std::size_t v = 0; v < num_vertices; ++v)
    if (mesh.vertex_to_dof_[v] >= 0) mesh.dof_to_vertex_[static_cast<std::size_t>(mesh.vertex_to_dof_[v])] = v;

  // vertex id from lattice coordinates
  auto vid = [&](std::array<std::size_t, 3> idx) {
    std::size_t v = 0;
    for (int a = dim - 1; a >= 0; --a) v = v * nv1 + idx[static_cast<std::size_t>(a)];
    return static_cast<std::int32_t>(v);
  };

  std::size_t num_cells = 1;
  for (int a = 0; a < dim; ++a) num_cells *= n;

  std::array<int, 3> perm = {0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  if (dim == 1)
    perms.push_back(perm);
  else {
    std::vector<int> p(static_cast<std::size_t>(dim));
    std::iota(p.begin(), p.end(), 0);
    do {
      std::array<int, 3> q = {0, 0, 0};
      for (int a = 0; a < dim; ++a) q[static_cast<std::size_t>(a)] = p[static_cast<std::size_t>(a)];
      perms.push_back(q);
    } while (std::next_permutation(p.begin(), p.end()));
  }

  for (std::size_t cell = 0; cell < num_cells; ++cell) {
    std::array<std::size_t, 3> c = {0, 0, 0};
    std::size_t rest = cell;
    for (int a = 0; a < dim; ++a) {
      c[static_cast<std::size_t>(a)] = rest % n;
      rest /= n;
    }
    for (const auto& p : perms) {
      std::vector<std::int32_t> path;
      std::array<std::size_t, 3> cur = c;
      path.push_back(vid(cur));
      for (int a = 0; a < dim; ++a) {
        cur[static_cast<std::size_t>(p[static_cast<std::size_t>(a)])] += 1;
        path.push_back(vid(cur));
      }
      // orient positively: swap the last two path vertices for odd permutations
      std::array<double, 9> jac{};
      const auto& x0 = mesh.vertex_coords_[static_cast<std::size_t>(path[0])];
      for (int k = 1; k <= dim; ++k)
        for (int a = 0; a < dim; ++a)
          jac[static_cast<std::size_t>((k - 1) * dim + a)] =
              mesh.vertex_coords_[static_cast<std::size_t>(path[static_cast<std::size_t>(k)])][static_cast<std::size_t>(a)] -
              x0[static_cast<std::size_t>(a)];
      double det = 0.0;
      if (dim == 1)
        det = jac[0];
      else if (dim == 2)
        det = jac[0] * jac[3] - jac[1] * jac[2];
      else
        det = jac[0] * (jac[4] * jac[8] - jac[5] * jac[7]) - jac[1] * (jac[3] * jac[8] - jac[5] * jac[6]) +
              jac[2] * (jac[3] * jac[7] - jac[4] * jac[6]);
      if (det < 0.0) std::swap(path[static_cast<std::size_t>(dim - 1)], path[static_cast<std::size_t>(dim)]);
      mesh.simplices_.insert(mesh.simplices_.end(), path.begin(), path.end());
    }
  }
  return mesh;
}

namespace {

struct ElementGeometry {
  double volume;
  std::array<std::array<double, 3>, 4> grads;  // barycentric gradients
};

ElementGeometry element_geometry(const SimplicialMesh& mesh, std::size_t s) {
  const int d = mesh.dim();
  const auto verts = mesh.simplex(s);
  const auto& x0 = mesh.vertex(static_cast<std::size_t>(verts[0]));
  double jac[3][3] = {{0}};
  for (int k = 1; k <= d; ++k)
    for (int a = 0; a < d; ++a)
      jac[a][k - 1] = mesh.vertex(static_cast<std::size_t>(verts[static_cast<std::size_t>(k)]))[static_cast<std::size_t>(a)] -
                      x0[static_cast<std::size_t>(a)];

  double det = 0.0;
  double inv[3][3] = {{0}};  // rows of J^-1
  if (d == 1) {
    det = jac[0][0];
    if (det != 0.0) inv[0][0] = 1.0 / det;
  } else if (d == 2) {
    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if (det != 0.0) {
      inv[0][0] = jac[1][1] / det;
      inv[0][1] = -jac[0][1] / det;
      inv[1][0] = -jac[1][0] / det;
      inv[1][1] = jac[0][0] / det;
    }
  } else {
    det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) -
          jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) +
          jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
    if (det != 0.0) {
      inv[0][0] = (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) / det;
      inv[0][1] = (jac[0][2] * jac[2][1] - jac[0][1] * jac[2][2]) / det;
      inv[0][2] = (jac[0][1] * jac[1][2] - jac[0][2] * jac[1][1]) / det;
      inv[1][0] = (jac[1][2] * jac[2][0] - jac[1][0] * jac[2][2]) / det;
      inv[1][1] = (jac[0][0] * jac[2][2] - jac[0][2] * jac[2][0]) / det;
      inv[1][2] = (jac[0][2] * jac[1][0] - jac[0][0] * jac[1][2]) / det;
      inv[2][0] = (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]) / det;
      inv[2][1] = (jac[0][1] * jac[2][0] - jac[0][0] * jac[2][1]) / det;
      inv[2][2] = (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) / det;
    }
  }
  if (det == 0.0) throw std::runtime_error("spatial assembly: degenerate simplex");

  ElementGeometry geo;
  double factorial = 1.0;
  for (int a = 2; a <= d; ++a) factorial *= a;
  geo.volume = std::abs(det) / factorial;
  for (auto& g : geo.grads) g = {0.0, 0.0, 0.0};
  for (int k = 1; k <= d; ++k)
    for (int a = 0; a < d; ++a) geo.grads[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = inv[k - 1][a];
  for (int k = 1; k <= d; ++k)
    for (int a = 0; a < d; ++a)
      geo.grads[0][static_cast<std::size_t>(a)] -= geo.grads[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
  return geo;
}

SparseSymMatrix assemble_p1(const SimplicialMesh& mesh, bool stiffness, bool include_boundary) {
  const int d = mesh.dim();
  const std::size_t nverts = d + 1;
  std::vector<SparseSymMatrix::Triplet> triplets;
  triplets.reserve(mesh.num_simplices() * nverts * nverts);

  const double mass_scale = 1.0 / static_cast<double>((d + 1) * (d + 2));

  for (std::size_t s = 0; s < mesh.num_simplices(); ++s) {
    const auto verts = mesh.simplex(s);
    const ElementGeometry geo = element_geometry(mesh, s);
    for (std::size_t a = 0; a < nverts; ++a) {
      const std::int64_t ia = include_boundary ? verts[a] : mesh.dof_of_vertex(static_cast<std::size_t>(verts[a]));
      if (ia < 0) continue;
      for (std::size_t b = 0; b < nverts; ++b) {
        const std::int64_t ib = include_boundary ? verts[b] : mesh.dof_of_vertex(static_cast<std::size_t>(verts[b]));
        if (ib < 0) continue;
        double value;
        if (stiffness) {
          double g = 0.0;
          for (int c = 0; c < d; ++c) g += geo.grads[a][static_cast<std::size_t>(c)] * geo.grads[b][static_cast<std::size_t>(c)];
          value = geo.volume * g;
        } else {
          value = geo.volume * mass_scale * (a == b ? 2.0 : 1.0);
        }
        triplets.push_back({static_cast<std::uint32_t>(ia), static_cast<std::uint32_t>(ib), value});
      }
    }
  }
  const std::size_t size = include_boundary ? mesh.num_vertices() : mesh.num_interior_dofs();
  return SparseSymMatrix::from_triplets(size, std::move(triplets));
}

}  // namespace

double SimplicialMesh::simplex_volume(std::size_t s) const { return element_geometry(*this, s).volume; }

SparseSymMatrix assemble_spatial_stiffness(const SimplicialMesh& mesh) { return assemble_p1(mesh, true, false); }
SparseSymMatrix assemble_spatial_mass(const SimplicialMesh& mesh) { return assemble_p1(mesh, false, false); }
SparseSymMatrix assemble_spatial_stiffness_full(const SimplicialMesh& mesh) { return assemble_p1(mesh, true, true); }
SparseSymMatrix assemble_spatial_mass_full(const SimplicialMesh& mesh) { return assemble_p1(mesh, false, true); }

double evaluate_fe_function(const SimplicialMesh& mesh, std::span<const double> dofs,
                            const std::array<double, 3>& x) {
  const int d = mesh.dim();
  const std::size_t n = mesh.cells_per_axis();
  for (int a = 0; a < d; ++a)
    if (x[static_cast<std::size_t>(a)] < 0.0 || x[static_cast<std::size_t>(a)] > 1.0)
      throw std::invalid_argument("evaluate_fe_function: point outside [0,1]^d");

  std::array<std::size_t, 3> cell = {0, 0, 0};
  std::array<double, 3> local = {0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) {
    const double scaled = x[static_cast<std::size_t>(a)] * static_cast<double>(n);
    std::size_t c = static_cast<std::size_t>(scaled);
    if (c >= n) c = n - 1;
    cell[static_cast<std::size_t>(a)] = c;
    local[static_cast<std::size_t>(a)] = scaled - static_cast<double>(c);
  }

  // Kuhn simplex containing the point: axes sorted by descending local
  // coordinate; barycentric weights are successive differences.
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.begin() + d,
            [&](int a, int b) { return local[static_cast<std::size_t>(a)] > local[static_cast<std::size_t>(b)]; });

  const std::size_t nv1 = n + 1;
  auto vertex_id = [&](const std::array<std::size_t, 3>& idx) {
    std::size_t v = 0;
    for (int a = d - 1; a >= 0; --a) v = v * nv1 + idx[static_cast<std::size_t>(a)];
    return v;
  };
  auto dof_value = [&](const std::array<std::size_t, 3>& idx) {
    const std::int64_t dof = mesh.dof_of_vertex(vertex_id(idx));
    return dof < 0 ? 0.0 : dofs[static_cast<std::size_t>(dof)];
  };

  std::array<std::size_t, 3> idx = cell;
  double prev = 1.0;
  double value = 0.0;
  for (int k = 0; k < d; ++k) {
    const double yk = local[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    value += (prev - yk) * dof_value(idx);
    idx[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] += 1;
    prev = yk;
  }
  value += prev * dof_value(idx);
  return value;
}

}  // namespace stoc
