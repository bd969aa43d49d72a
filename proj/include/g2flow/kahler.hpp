#pragma once

#include <Eigen/Dense>

#include "g2flow/grid.hpp"

namespace g2flow::kahler {

/// Field of n x n Hermitian matrices h_{p qbar} over the torus grid.
/// Upper-triangle entries (p <= q) are stored; the rest follow by conjugation.
/// The flat background is h = identity; metric_from_potential adds the mixed
/// complex Hessian of a potential on top of it.
class HermitianMetricField {
 public:
  HermitianMetricField() = default;
  explicit HermitianMetricField(const TorusGrid& g);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n; }

  Complex at(std::size_t idx, int p, int q) const {
    if (p <= q) return entries_[tri(p, q)][idx];
    return std::conj(entries_[tri(q, p)][idx]);
  }
  ComplexField& entry(int p, int q) { return entries_[tri(p, q)]; }
  const ComplexField& entry(int p, int q) const { return entries_[tri(p, q)]; }

  Eigen::MatrixXcd matrix(std::size_t idx) const;

  /// Real determinant at one point (imaginary part of the Hermitian
  /// determinant is dropped; it is zero analytically).
  double det(std::size_t idx) const;

  /// Real 2n x 2n Riemannian metric g(.,.) = omega(., J.) at one point.
  void real_metric(std::size_t idx, Eigen::MatrixXd& g) const;

  /// Kahler 2-form omega as a real antisymmetric 2n x 2n matrix at one point.
  void kahler_matrix(std::size_t idx, Eigen::MatrixXd& w) const;

 private:
  int tri(int p, int q) const { return p * grid_.n - p * (p - 1) / 2 + (q - p); }
  TorusGrid grid_;
  std::vector<ComplexField> entries_;
};

/// Mixed complex Hessian d^2 f / dz^p dzbar^q as a Hermitian coefficient
/// field (no background added).
HermitianMetricField complex_hessian(const ScalarField& f);

/// h_{p qbar} = delta_{pq} + d^2 u / dz^p dzbar^q.
HermitianMetricField metric_from_potential(const ScalarField& u);

ScalarField det_field(const HermitianMetricField& h);

/// |Omega|_omega = det(h)^{-1/2} for Omega = dz^1 ^ ... ^ dz^n on the unit
/// covolume lattice. Throws if det is not strictly positive.
ScalarField omega_norm(const HermitianMetricField& h);

/// Ricci form coefficients R_{p qbar} = -d^2 (log det h)/dz^p dzbar^q.
HermitianMetricField ricci(const HermitianMetricField& h);

/// Integral against the measure omega^n/n! = det(h) dx (unit covolume).
double integrate(const ScalarField& f, const HermitianMetricField& h);
/// Flat-measure integral.
double integrate(const ScalarField& f);

struct PositivityReport {
  bool positive = false;
  ScalarField min_eigenvalue;
  std::size_t first_failure = 0;  // grid index, valid when !positive
};

PositivityReport positivity_check(const HermitianMetricField& h);

/// Cheap Sylvester-criterion positivity scan (no eigenvalue field).
bool is_positive_fast(const HermitianMetricField& h, std::size_t* where = nullptr);

/// Real vector field on the torus, one scalar field per coordinate.
class VectorFieldReal {
 public:
  VectorFieldReal() = default;
  explicit VectorFieldReal(const TorusGrid& g)
      : grid_(g), comp_(static_cast<std::size_t>(g.dims()), ScalarField(g)) {}

  const TorusGrid& grid() const { return grid_; }
  ScalarField& operator[](int a) { return comp_[static_cast<std::size_t>(a)]; }
  const ScalarField& operator[](int a) const { return comp_[static_cast<std::size_t>(a)]; }
  double sup_abs() const;

 private:
  TorusGrid grid_;
  std::vector<ScalarField> comp_;
};

/// Riemannian gradient grad_h s: solves g_real Y = ds pointwise.
VectorFieldReal gradient(const HermitianMetricField& h, const ScalarField& s);

/// Gradient against a packed real symmetric metric (upper triangle, row-major
/// over a <= b), used for pulled-back metrics.
VectorFieldReal gradient_packed(const std::vector<ScalarField>& gx, const ScalarField& s);

}  // namespace g2flow::kahler
