#pragma once

#include <optional>

#include "g2flow/exterior.hpp"
#include "g2flow/grid.hpp"
#include "g2flow/kahler.hpp"

namespace g2flow::product {

/// Number of circle factors: T^3 x X^4 for n=2, S^1 x X^6 for n=3.
inline int circle_count(int n) { return n == 2 ? 3 : 1; }

/// Differential form on X^{2n} stored as one scalar field per sorted index
/// subset (ext::BasisTable order for dim 2n). An absent component vector
/// means the zero form.
class XFormField {
 public:
  XFormField() = default;
  XFormField(const TorusGrid& g, int degree);

  const TorusGrid& grid() const { return grid_; }
  int degree() const { return deg_; }
  int component_count() const;
  bool is_zero() const { return comp_.empty(); }
  void materialize();

  ScalarField& comp(int i);
  const ScalarField& comp(int i) const;
  static const ScalarField& zero_field(const TorusGrid& g);

  XFormField& operator+=(const XFormField& o);
  XFormField& operator*=(double s);
  void scale_by(const ScalarField& s);

  double sup_abs() const;

 private:
  TorusGrid grid_;
  int deg_ = 0;
  std::vector<ScalarField> comp_;
};

/// Form on the product 7-manifold whose coefficients do not depend on the
/// circle coordinates: a map from circle-index subsets S to X-forms of degree
/// k - |S|, representing sum_S e^S ^ alpha_S with circle indices written to
/// the left of X indices, r^1 < r^2 < r^3.
class ProductForm {
 public:
  ProductForm() = default;
  ProductForm(const TorusGrid& g, int degree);

  const TorusGrid& grid() const { return grid_; }
  int degree() const { return deg_; }
  int circles() const { return circles_; }

  bool has_block(std::uint8_t mask) const;
  const XFormField& block(std::uint8_t mask) const;
  XFormField& ensure_block(std::uint8_t mask);
  void set_block(std::uint8_t mask, XFormField f);

  ProductForm& operator+=(const ProductForm& o);
  ProductForm& operator-=(const ProductForm& o);
  ProductForm& operator*=(double s);
  friend ProductForm operator+(ProductForm a, const ProductForm& b) { return a += b; }
  friend ProductForm operator-(ProductForm a, const ProductForm& b) { return a -= b; }
  friend ProductForm operator*(double s, ProductForm a) { return a *= s; }

  double sup_abs() const;
  /// sup over grid points of the 7-dimensional coefficient difference
  static double sup_distance(const ProductForm& a, const ProductForm& b);

  /// The full 7-dimensional form at one grid point (basis: circles first,
  /// then X coordinates).
  ext::Form at_point(std::size_t idx) const;

 private:
  TorusGrid grid_;
  int deg_ = 0;
  int circles_ = 0;
  std::vector<std::optional<XFormField>> blocks_;  // indexed by circle mask
};

ProductForm wedge(const ProductForm& a, const ProductForm& b);
ProductForm exterior_d(const ProductForm& a);
/// Interior product with an X-tangent vector field (circle components are
/// structurally zero).
ProductForm interior_x(const kahler::VectorFieldReal& y, const ProductForm& a);
/// Cartan formula L_Y = d iota_Y + iota_Y d.
ProductForm lie_derivative(const kahler::VectorFieldReal& y, const ProductForm& a);

}  // namespace g2flow::product
