#include "cvcouple/arterial/dg_basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "cvcouple/errors.hpp"

namespace cvcouple::arterial {

namespace {

// Legendre P_n and its derivative by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one point");
  QuadratureRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    r.points[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

std::vector<double> gauss_lobatto_nodes(int n) {
  if (n < 2) throw ValidationError("gauss_lobatto_nodes: need at least two nodes");
  std::vector<double> x(n);
  x.front() = -1.0;
  x.back() = 1.0;
  // Interior nodes are roots of P'_{n-1}; Newton on P'_{n-1} with
  // P''_{m} = (2x P'_m - m(m+1) P_m) / (1 - x^2).
  const int m = n - 1;
  for (int i = 1; i < m; ++i) {
    double xi = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      double p = 0, dp = 0;
      legendre(m, xi, p, dp);
      const double d2p = (2.0 * xi * dp - m * (m + 1.0) * p) / (1.0 - xi * xi);
      const double dx = dp / d2p;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    x[i] = xi;
  }
  return x;
}

ReferenceElement::ReferenceElement(int p) : order(p), n_nodes(p + 1) {
  if (p < 1 || p > 3) throw ValidationError("DG order must be 1, 2 or 3");
  nodes = gauss_lobatto_nodes(n_nodes);
  quad = gauss_legendre(p + 2);
  const int nq = n_quad();
  phi.assign(static_cast<std::size_t>(nq) * n_nodes, 0.0);
  dphi.assign(static_cast<std::size_t>(nq) * n_nodes, 0.0);
  for (int q = 0; q < nq; ++q) {
    const double xi = quad.points[q];
    for (int j = 0; j < n_nodes; ++j) {
      double l = 1.0;
      double dl = 0.0;
      for (int k = 0; k < n_nodes; ++k) {
        if (k == j) continue;
        double term = 1.0 / (nodes[j] - nodes[k]);
        for (int m = 0; m < n_nodes; ++m) {
          if (m == j || m == k) continue;
          term *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
        }
        dl += term;
        l *= (xi - nodes[k]) / (nodes[j] - nodes[k]);
      }
      phi[q * n_nodes + j] = l;
      dphi[q * n_nodes + j] = dl;
    }
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < n_nodes; ++i)
      for (int j = 0; j < n_nodes; ++j)
        M(i, j) += quad.weights[q] * phi[q * n_nodes + i] * phi[q * n_nodes + j];
  const Eigen::MatrixXd Mi = M.inverse();
  mass_inv.resize(static_cast<std::size_t>(n_nodes) * n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    for (int j = 0; j < n_nodes; ++j) mass_inv[i * n_nodes + j] = Mi(i, j);
}

void ReferenceElement::eval(double xi, double* out) const {
  for (int j = 0; j < n_nodes; ++j) {
    if (xi == nodes[j]) {
      for (int k = 0; k < n_nodes; ++k) out[k] = (k == j) ? 1.0 : 0.0;
      return;
    }
  }
  for (int j = 0; j < n_nodes; ++j) {
    double l = 1.0;
    for (int k = 0; k < n_nodes; ++k)
      if (k != j) l *= (xi - nodes[k]) / (nodes[j] - nodes[k]);
    out[j] = l;
  }
}

}  // namespace cvcouple::arterial
