#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace g2flow::ext {

/// Dense exterior algebra over R^dim for dim <= 7. A k-form is stored as its
/// C(dim,k) independent coefficients over lexicographically sorted index
/// subsets of the standard basis e^1..e^dim.
constexpr int kMaxDim = 7;

int choose(int n, int k);

/// Precomputed subset bookkeeping for one dimension.
struct BasisTable {
  int dim = 0;
  // subsets[k][i] = bitmask of the i-th sorted k-subset
  std::array<std::vector<std::uint8_t>, kMaxDim + 1> subsets;
  // index of a subset bitmask within its degree, -1 if degree mismatch
  std::array<std::array<int, 1 << kMaxDim>, kMaxDim + 1> index{};

  static const BasisTable& get(int dim);
};

/// Sign of sorting the concatenation (S,T) of two disjoint sorted subsets.
int merge_sign(std::uint8_t s, std::uint8_t t);

class Form {
 public:
  Form() = default;
  Form(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return deg_; }
  int size() const { return static_cast<int>(c_.size()); }

  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  std::span<double> coeffs() { return c_; }
  std::span<const double> coeffs() const { return c_; }

  /// Coefficient for an arbitrary index tuple (0-based, possibly unsorted);
  /// antisymmetry handled by sign of the sorting permutation.
  double component(std::initializer_list<int> indices) const;
  void set_component(std::initializer_list<int> indices, double value);

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  Form& operator*=(double s);
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(double s, Form a) { return a *= s; }
  friend Form operator-(Form a) { return a *= -1.0; }

  double max_abs() const;

 private:
  int dim_ = 0;
  int deg_ = 0;
  std::vector<double> c_;
};

Form wedge(const Form& a, const Form& b);

/// Interior product v <hook> a with a plain vector (no metric involved).
Form interior(std::span<const double> v, const Form& a);

/// L2 inner product Gram matrix on degree-k forms induced by the inverse
/// metric: G[a][b] = det( ginv[Sa, Sb] ).
Eigen::MatrixXd gram(const Eigen::MatrixXd& ginv, int dim, int k);

/// Hodge star for a fixed metric and orientation, precomputed per degree on
/// first use. vol_coeff is the coefficient of the volume form over e^{1..dim}
/// (may be negative for an orientation-reversing calibration; the star is
/// built from it as given).
class StarOperator {
 public:
  StarOperator(Eigen::MatrixXd g, double vol_coeff);

  Form apply(const Form& a) const;
  double vol_coeff() const { return vol_; }
  const Eigen::MatrixXd& metric() const { return g_; }

 private:
  int dim_;
  Eigen::MatrixXd g_;
  double vol_;
  mutable std::array<Eigen::MatrixXd, kMaxDim + 2> op_;  // per input degree
  mutable std::array<bool, kMaxDim + 2> built_{};
  void build(int k) const;
};

}  // namespace g2flow::ext
