#include "g2flow/kahler.hpp"

#include <cmath>

#include "g2flow/spectral.hpp"

namespace g2flow::kahler {

HermitianMetricField::HermitianMetricField(const TorusGrid& g) : grid_(g) {
  const int m = g.n * (g.n + 1) / 2;
  entries_.assign(static_cast<std::size_t>(m), ComplexField(g));
}

Eigen::MatrixXcd HermitianMetricField::matrix(std::size_t idx) const {
  const int m = grid_.n;
  Eigen::MatrixXcd H(m, m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) H(p, q) = at(idx, p, q);
  return H;
}

double HermitianMetricField::det(std::size_t idx) const {
  if (grid_.n == 2) {
    const Complex a = entries_[0][idx], b = entries_[1][idx], c = entries_[2][idx];
    return a.real() * c.real() - std::norm(b);
  }
  const Complex a = entries_[0][idx], b = entries_[1][idx], c = entries_[2][idx];
  const Complex d = entries_[3][idx], e = entries_[4][idx], f = entries_[5][idx];
  // | a  b  c |
  // | b* d  e |
  // | c* e* f |
  const Complex det = a * (d * f - e * std::conj(e)) - b * (std::conj(b) * f - e * std::conj(c)) +
                      c * (std::conj(b) * std::conj(e) - d * std::conj(c));
  return det.real();
}

void HermitianMetricField::real_metric(std::size_t idx, Eigen::MatrixXd& g) const {
  const int m = grid_.n;
  g.resize(2 * m, 2 * m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      const Complex h = at(idx, p, q);
      g(2 * p, 2 * q) = h.real();
      g(2 * p + 1, 2 * q + 1) = h.real();
      g(2 * p, 2 * q + 1) = h.imag();
      g(2 * p + 1, 2 * q) = -h.imag();
    }
}

void HermitianMetricField::kahler_matrix(std::size_t idx, Eigen::MatrixXd& w) const {
  const int m = grid_.n;
  w.resize(2 * m, 2 * m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      const Complex h = at(idx, p, q);
      w(2 * p, 2 * q) = -h.imag();
      w(2 * p + 1, 2 * q + 1) = -h.imag();
      w(2 * p, 2 * q + 1) = h.real();
      w(2 * p + 1, 2 * q) = -at(idx, q, p).real();
    }
}

HermitianMetricField complex_hessian(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  HermitianMetricField h(g);
  for (int p = 0; p < g.n; ++p)
    for (int q = p; q < g.n; ++q) h.entry(p, q) = spectral::hessian_pq(f, p, q);
  return h;
}

HermitianMetricField metric_from_potential(const ScalarField& u) {
  HermitianMetricField h = complex_hessian(u);
  for (int p = 0; p < u.grid().n; ++p) {
    ComplexField& e = h.entry(p, p);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += 1.0;
  }
  return h;
}

ScalarField det_field(const HermitianMetricField& h) {
  ScalarField d(h.grid());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = h.det(i);
  return d;
}

ScalarField omega_norm(const HermitianMetricField& h) {
  ScalarField f(h.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = h.det(i);
    if (d <= 0.0)
      throw std::domain_error("omega_norm: non-positive determinant at grid index " +
                              std::to_string(i));
    f[i] = 1.0 / std::sqrt(d);
  }
  return f;
}

HermitianMetricField ricci(const HermitianMetricField& h) {
  ScalarField logdet(h.grid());
  for (std::size_t i = 0; i < logdet.size(); ++i) {
    const double d = h.det(i);
    if (d <= 0.0) throw std::domain_error("ricci: non-positive determinant");
    logdet[i] = std::log(d);
  }
  HermitianMetricField r(h.grid());
  for (int p = 0; p < h.n(); ++p)
    for (int q = p; q < h.n(); ++q) {
      ComplexField e = spectral::hessian_pq(logdet, p, q);
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = -e[i];
      r.entry(p, q) = std::move(e);
    }
  return r;
}

double integrate(const ScalarField& f, const HermitianMetricField& h) {
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * h.det(i);
  return s / static_cast<double>(f.size());
}

double integrate(const ScalarField& f) { return f.mean(); }

PositivityReport positivity_check(const HermitianMetricField& h) {
  PositivityReport rep;
  rep.min_eigenvalue = ScalarField(h.grid());
  rep.positive = true;
  const int m = h.n();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (std::size_t i = 0; i < rep.min_eigenvalue.size(); ++i) {
    double lo;
    if (m == 2) {
      const double a = h.at(i, 0, 0).real(), b = h.at(i, 1, 1).real();
      const double off = std::abs(h.at(i, 0, 1));
      lo = 0.5 * (a + b) - std::sqrt(0.25 * (a - b) * (a - b) + off * off);
    } else {
      es.compute(h.matrix(i), Eigen::EigenvaluesOnly);
      lo = es.eigenvalues().minCoeff();
    }
    rep.min_eigenvalue[i] = lo;
    if (lo <= 0.0 && rep.positive) {
      rep.positive = false;
      rep.first_failure = i;
    }
  }
  return rep;
}

bool is_positive_fast(const HermitianMetricField& h, std::size_t* where) {
  const int m = h.n();
  const std::size_t np = h.grid().points();
  for (std::size_t i = 0; i < np; ++i) {
    bool ok = h.at(i, 0, 0).real() > 0.0;
    if (ok && m >= 2) {
      const double d2 = h.at(i, 0, 0).real() * h.at(i, 1, 1).real() - std::norm(h.at(i, 0, 1));
      ok = d2 > 0.0;
    }
    if (ok && m == 3) ok = h.det(i) > 0.0;
    if (ok && m == 2) ok = h.det(i) > 0.0;
    if (!ok) {
      if (where) *where = i;
      return false;
    }
  }
  return true;
}

double VectorFieldReal::sup_abs() const {
  double s = 0;
  for (const auto& c : comp_) s = std::max(s, c.sup_abs());
  return s;
}

VectorFieldReal gradient(const HermitianMetricField& h, const ScalarField& s) {
  const TorusGrid& g = h.grid();
  const int d = g.dims();
  std::vector<ScalarField> ds;
  ds.reserve(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) ds.push_back(spectral::derivative(s, a));
  VectorFieldReal y(g);
  Eigen::MatrixXd gm;
  Eigen::VectorXd rhs(d), sol(d);
  for (std::size_t i = 0; i < s.size(); ++i) {
    h.real_metric(i, gm);
    for (int a = 0; a < d; ++a) rhs(a) = ds[static_cast<std::size_t>(a)][i];
    sol = gm.ldlt().solve(rhs);
    for (int a = 0; a < d; ++a) y[a][i] = sol(a);
  }
  return y;
}

VectorFieldReal gradient_packed(const std::vector<ScalarField>& gx, const ScalarField& s) {
  const TorusGrid& g = s.grid();
  const int d = g.dims();
  if (gx.size() != static_cast<std::size_t>(d * (d + 1) / 2))
    throw std::invalid_argument("gradient_packed: wrong component count");
  std::vector<ScalarField> ds;
  ds.reserve(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) ds.push_back(spectral::derivative(s, a));
  VectorFieldReal y(g);
  Eigen::MatrixXd gm(d, d);
  Eigen::VectorXd rhs(d), sol(d);
  for (std::size_t i = 0; i < s.size(); ++i) {
    int c = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b, ++c) gm(a, b) = gm(b, a) = gx[static_cast<std::size_t>(c)][i];
    for (int a = 0; a < d; ++a) rhs(a) = ds[static_cast<std::size_t>(a)][i];
    sol = gm.ldlt().solve(rhs);
    for (int a = 0; a < d; ++a) y[a][i] = sol(a);
  }
  return y;
}

}  // namespace g2flow::kahler
