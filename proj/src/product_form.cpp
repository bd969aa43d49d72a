#include "g2flow/product_form.hpp"

#include <bit>
#include <map>

#include "g2flow/spectral.hpp"

namespace g2flow::product {

using ext::BasisTable;
using ext::choose;
using ext::merge_sign;

XFormField::XFormField(const TorusGrid& g, int degree) : grid_(g), deg_(degree) {
  if (degree < 0 || degree > g.dims()) throw std::invalid_argument("XFormField: bad degree");
}

int XFormField::component_count() const { return choose(grid_.dims(), deg_); }

void XFormField::materialize() {
  if (comp_.empty()) comp_.assign(static_cast<std::size_t>(component_count()), ScalarField(grid_));
}

ScalarField& XFormField::comp(int i) {
  materialize();
  return comp_[static_cast<std::size_t>(i)];
}

const ScalarField& XFormField::comp(int i) const {
  if (comp_.empty()) return zero_field(grid_);
  return comp_[static_cast<std::size_t>(i)];
}

const ScalarField& XFormField::zero_field(const TorusGrid& g) {
  static std::map<std::pair<int, int>, ScalarField> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = cache.try_emplace({g.n, g.N});
  if (inserted) it->second = ScalarField(g);
  return it->second;
}

XFormField& XFormField::operator+=(const XFormField& o) {
  if (o.is_zero()) return *this;
  if (deg_ != o.deg_) throw std::invalid_argument("XFormField: degree mismatch");
  materialize();
  for (std::size_t i = 0; i < comp_.size(); ++i) comp_[i] += o.comp_[i];
  return *this;
}

XFormField& XFormField::operator*=(double s) {
  for (auto& c : comp_) c *= s;
  return *this;
}

void XFormField::scale_by(const ScalarField& s) {
  for (auto& c : comp_) c *= s;
}

double XFormField::sup_abs() const {
  double m = 0;
  for (const auto& c : comp_) m = std::max(m, c.sup_abs());
  return m;
}

ProductForm::ProductForm(const TorusGrid& g, int degree)
    : grid_(g), deg_(degree), circles_(circle_count(g.n)) {
  if (degree < 0 || degree > 7) throw std::invalid_argument("ProductForm: bad degree");
  blocks_.assign(std::size_t(1) << circles_, std::nullopt);
}

bool ProductForm::has_block(std::uint8_t mask) const {
  return mask < blocks_.size() && blocks_[mask].has_value() && !blocks_[mask]->is_zero();
}

const XFormField& ProductForm::block(std::uint8_t mask) const {
  return *blocks_.at(mask);
}

XFormField& ProductForm::ensure_block(std::uint8_t mask) {
  const int xdeg = deg_ - std::popcount(mask);
  if (mask >= blocks_.size() || xdeg < 0 || xdeg > grid_.dims())
    throw std::invalid_argument("ProductForm: invalid block");
  if (!blocks_[mask]) blocks_[mask] = XFormField(grid_, xdeg);
  blocks_[mask]->materialize();
  return *blocks_[mask];
}

void ProductForm::set_block(std::uint8_t mask, XFormField f) {
  const int xdeg = deg_ - std::popcount(mask);
  if (f.degree() != xdeg) throw std::invalid_argument("ProductForm: block degree mismatch");
  blocks_[mask] = std::move(f);
}

ProductForm& ProductForm::operator+=(const ProductForm& o) {
  if (deg_ != o.deg_ || !(grid_ == o.grid_)) throw std::invalid_argument("ProductForm: mismatch");
  for (std::size_t m = 0; m < blocks_.size(); ++m)
    if (o.has_block(static_cast<std::uint8_t>(m)))
      ensure_block(static_cast<std::uint8_t>(m)) += o.block(static_cast<std::uint8_t>(m));
  return *this;
}

ProductForm& ProductForm::operator-=(const ProductForm& o) {
  ProductForm neg = o;
  neg *= -1.0;
  return *this += neg;
}

ProductForm& ProductForm::operator*=(double s) {
  for (auto& b : blocks_)
    if (b) *b *= s;
  return *this;
}

double ProductForm::sup_abs() const {
  double m = 0;
  for (const auto& b : blocks_)
    if (b) m = std::max(m, b->sup_abs());
  return m;
}

double ProductForm::sup_distance(const ProductForm& a, const ProductForm& b) {
  ProductForm d = a;
  d -= b;
  return d.sup_abs();
}

ext::Form ProductForm::at_point(std::size_t idx) const {
  ext::Form f(7, deg_);
  const auto& t7 = BasisTable::get(7);
  const auto& tx = BasisTable::get(grid_.dims());
  for (std::size_t m = 0; m < blocks_.size(); ++m) {
    if (!has_block(static_cast<std::uint8_t>(m))) continue;
    const XFormField& x = *blocks_[m];
    const int j = x.degree();
    const auto& subs = tx.subsets[j];
    for (int c = 0; c < static_cast<int>(subs.size()); ++c) {
      const double v = x.comp(c)[idx];
      if (v == 0.0) continue;
      // circle indices occupy bits [0, circles), X indices shifted above them
      const std::uint8_t full =
          static_cast<std::uint8_t>(m | (static_cast<unsigned>(subs[c]) << circles_));
      f[t7.index[deg_][full]] += v;  // merge sign is +1: circles sit left of X
    }
  }
  return f;
}

ProductForm wedge(const ProductForm& a, const ProductForm& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("wedge: grid mismatch");
  const TorusGrid& g = a.grid();
  const int dx = g.dims();
  const auto& tx = BasisTable::get(dx);
  ProductForm out(g, a.degree() + b.degree());
  const int nc = out.circles();
  for (std::uint8_t sa = 0; sa < (1u << nc); ++sa) {
    if (!a.has_block(sa)) continue;
    const XFormField& fa = a.block(sa);
    const int ja = fa.degree();
    for (std::uint8_t sb = 0; sb < (1u << nc); ++sb) {
      if (sa & sb) continue;
      if (!b.has_block(sb)) continue;
      const XFormField& fb = b.block(sb);
      const int jb = fb.degree();
      if (ja + jb > dx) continue;
      // (e^Sa ^ alpha) ^ (e^Sb ^ beta)
      //   = (-1)^{ja*|Sb|} merge_sign(Sa,Sb) e^{Sa u Sb} ^ (alpha ^ beta)
      const int csign = ((ja * std::popcount(sb)) % 2 ? -1 : 1) * merge_sign(sa, sb);
      XFormField& fo = out.ensure_block(sa | sb);
      const auto& subsa = tx.subsets[ja];
      const auto& subsb = tx.subsets[jb];
      for (int ia = 0; ia < static_cast<int>(subsa.size()); ++ia) {
        const ScalarField& ca = fa.comp(ia);
        for (int ib = 0; ib < static_cast<int>(subsb.size()); ++ib) {
          if (subsa[ia] & subsb[ib]) continue;
          const ScalarField& cb = fb.comp(ib);
          const int xsign = merge_sign(subsa[ia], subsb[ib]);
          const double s = csign * xsign;
          ScalarField& co = fo.comp(tx.index[ja + jb][subsa[ia] | subsb[ib]]);
          for (std::size_t p = 0; p < co.size(); ++p) co[p] += s * ca[p] * cb[p];
        }
      }
    }
  }
  return out;
}

ProductForm exterior_d(const ProductForm& a) {
  const TorusGrid& g = a.grid();
  const int dx = g.dims();
  const auto& tx = BasisTable::get(dx);
  if (a.degree() >= 7) throw std::invalid_argument("exterior_d: top degree");
  ProductForm out(g, a.degree() + 1);
  const int nc = out.circles();
  for (std::uint8_t s = 0; s < (1u << nc); ++s) {
    if (!a.has_block(s)) continue;
    const XFormField& f = a.block(s);
    const int j = f.degree();
    if (j >= dx) continue;
    // d(e^S ^ alpha) = (-1)^{|S|} e^S ^ d_X alpha
    const double csign = std::popcount(s) % 2 ? -1.0 : 1.0;
    XFormField& fo = out.ensure_block(s);
    const auto& subs_out = tx.subsets[j + 1];
    for (int io = 0; io < static_cast<int>(subs_out.size()); ++io) {
      ScalarField& co = fo.comp(io);
      std::uint8_t mask = subs_out[io];
      int pos = 0;
      for (std::uint8_t mm = mask; mm; mm &= mm - 1, ++pos) {
        const int axis = std::countr_zero(mm);
        const std::uint8_t rest = static_cast<std::uint8_t>(mask & ~(1u << axis));
        const ScalarField& src = f.comp(tx.index[j][rest]);
        if (&src == &XFormField::zero_field(g)) continue;
        ScalarField der = spectral::derivative(src, axis);
        const double sgn = (pos % 2 ? -1.0 : 1.0) * csign;
        for (std::size_t p = 0; p < co.size(); ++p) co[p] += sgn * der[p];
      }
    }
  }
  return out;
}

ProductForm interior_x(const kahler::VectorFieldReal& y, const ProductForm& a) {
  const TorusGrid& g = a.grid();
  const int dx = g.dims();
  const auto& tx = BasisTable::get(dx);
  if (a.degree() < 1) throw std::invalid_argument("interior_x: degree 0 input");
  ProductForm out(g, a.degree() - 1);
  const int nc = out.circles();
  for (std::uint8_t s = 0; s < (1u << nc); ++s) {
    if (!a.has_block(s)) continue;
    const XFormField& f = a.block(s);
    const int j = f.degree();
    if (j == 0) continue;  // Y has no circle components
    const double csign = std::popcount(s) % 2 ? -1.0 : 1.0;
    XFormField& fo = out.ensure_block(s);
    const auto& subs = tx.subsets[j];
    for (int i = 0; i < static_cast<int>(subs.size()); ++i) {
      const ScalarField& src = f.comp(i);
      std::uint8_t mask = subs[i];
      int pos = 0;
      for (std::uint8_t mm = mask; mm; mm &= mm - 1, ++pos) {
        const int axis = std::countr_zero(mm);
        const std::uint8_t rest = static_cast<std::uint8_t>(mask & ~(1u << axis));
        ScalarField& co = fo.comp(tx.index[j - 1][rest]);
        const ScalarField& yc = y[axis];
        const double sgn = (pos % 2 ? -1.0 : 1.0) * csign;
        for (std::size_t p = 0; p < co.size(); ++p) co[p] += sgn * yc[p] * src[p];
      }
    }
  }
  return out;
}

ProductForm lie_derivative(const kahler::VectorFieldReal& y, const ProductForm& a) {
  if (a.degree() == 0) return interior_x(y, exterior_d(a));
  ProductForm out = exterior_d(interior_x(y, a));
  if (a.degree() < 7) out += interior_x(y, exterior_d(a));
  return out;
}

}  // namespace g2flow::product
