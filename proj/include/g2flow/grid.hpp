#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace g2flow {

/// Uniform periodic grid on the torus C^n / (Z^n + i Z^n), n = 2 or 3.
/// Real coordinates x_1..x_{2n} in [0,1) with z^p = x_{2p-1} + i x_{2p};
/// storage is row-major over (x_1, ..., x_{2n}), x_{2n} fastest.
struct TorusGrid {
  int n = 2;  // complex dimension
  int N = 16; // points per real axis

  TorusGrid() = default;
  TorusGrid(int n_, int N_) : n(n_), N(N_) {
    if (n != 2 && n != 3) throw std::invalid_argument("TorusGrid: n must be 2 or 3");
    if (N < 8 || N % 2 != 0) throw std::invalid_argument("TorusGrid: N must be even and >= 8");
  }

  int dims() const { return 2 * n; }
  std::size_t points() const {
    std::size_t p = 1;
    for (int a = 0; a < dims(); ++a) p *= static_cast<std::size_t>(N);
    return p;
  }
  double spacing() const { return 1.0 / N; }

  /// Coordinates of the grid point with flat index idx.
  void coords(std::size_t idx, double* x) const {
    for (int a = dims() - 1; a >= 0; --a) {
      x[a] = static_cast<double>(idx % N) / N;
      idx /= N;
    }
  }

  bool operator==(const TorusGrid& o) const { return n == o.n && N == o.N; }
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid_(g), v_(g.points(), fill) {}

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& operator*=(const ScalarField& o);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }

  double mean() const;
  double min() const;
  double max() const;
  double sup_abs() const;

 private:
  TorusGrid grid_;
  std::vector<double> v_;
};

using Complex = std::complex<double>;

class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(const TorusGrid& g, Complex fill = {})
      : grid_(g), v_(g.points(), fill) {}

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  Complex& operator[](std::size_t i) { return v_[i]; }
  Complex operator[](std::size_t i) const { return v_[i]; }
  Complex* data() { return v_.data(); }
  const Complex* data() const { return v_.data(); }

  ScalarField real() const;
  ScalarField imag() const;
  double sup_abs() const;

 private:
  TorusGrid grid_;
  std::vector<Complex> v_;
};

ComplexField to_complex(const ScalarField& f);

/// Snapshot I/O: <path>.json header {n, N, field, time, components} plus
/// <path>.bin, float64 little-endian, row-major over (x_1..x_{2n}), component
/// index fastest when components > 1.
struct FieldSnapshot {
  TorusGrid grid;
  std::string field;
  double time = 0.0;
  int components = 1;
  std::vector<double> data;  // size = points * components
};

void write_snapshot(const std::string& path_stem, const FieldSnapshot& snap);
FieldSnapshot read_snapshot(const std::string& path_stem);

}  // namespace g2flow
