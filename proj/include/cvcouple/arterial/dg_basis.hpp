#pragma once

#include <vector>

namespace cvcouple::arterial {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int n);

/// Gauss-Lobatto-Legendre nodes (n >= 2) on [-1, 1], endpoints included.
std::vector<double> gauss_lobatto_nodes(int n);

/// Nodal Lagrange basis of order p on GLL nodes, tabulated on an over-integrating Gauss rule.
struct ReferenceElement {
  int order = 1;
  int n_nodes = 2;
  std::vector<double> nodes;  // size n_nodes
  QuadratureRule quad;
  std::vector<double> phi;    // [q * n_nodes + j]
  std::vector<double> dphi;   // [q * n_nodes + j], d/dxi
  std::vector<double> mass_inv;  // inverse reference mass matrix, [i * n_nodes + j]

  explicit ReferenceElement(int p);

  int n_quad() const { return static_cast<int>(quad.points.size()); }
  /// Basis values at xi; exact Kronecker delta when xi is a node.
  void eval(double xi, double* out) const;
};

}  // namespace cvcouple::arterial
