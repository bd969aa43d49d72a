#include "g2flow/exterior.hpp"

#include <algorithm>
#include <bit>
#include <mutex>

namespace g2flow::ext {

int choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return static_cast<int>(r);
}

const BasisTable& BasisTable::get(int dim) {
  static std::array<BasisTable, kMaxDim + 1> tables;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int d = 1; d <= kMaxDim; ++d) {
      BasisTable& t = tables[d];
      t.dim = d;
      for (auto& row : t.index)
        for (auto& e : row) e = -1;
      for (std::uint8_t mask = 0; mask < (1u << d); ++mask) {
        int k = std::popcount(mask);
        t.index[k][mask] = static_cast<int>(t.subsets[k].size());
        t.subsets[k].push_back(mask);
      }
      // masks enumerated in increasing numeric order are exactly the
      // colex order of subsets; re-sort each degree to lex order so the
      // coefficient layout matches the documented basis ordering
      for (int k = 0; k <= d; ++k) {
        auto& v = t.subsets[k];
        std::sort(v.begin(), v.end(), [](std::uint8_t a, std::uint8_t b) {
          // lex compare of sorted index lists
          while (a && b) {
            int ia = std::countr_zero(a), ib = std::countr_zero(b);
            if (ia != ib) return ia < ib;
            a = static_cast<std::uint8_t>(a & (a - 1));
            b = static_cast<std::uint8_t>(b & (b - 1));
          }
          return a == 0 && b != 0;
        });
        for (int i = 0; i < static_cast<int>(v.size()); ++i) t.index[k][v[i]] = i;
      }
    }
  });
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("BasisTable: dim out of range");
  return tables[dim];
}

int merge_sign(std::uint8_t s, std::uint8_t t) {
  // inversions between S (left) and T (right)
  int inv = 0;
  std::uint8_t tt = t;
  while (tt) {
    int j = std::countr_zero(tt);
    inv += std::popcount(static_cast<std::uint8_t>(s >> (j + 1)));
    tt &= tt - 1;
  }
  return (inv & 1) ? -1 : 1;
}

Form::Form(int dim, int degree) : dim_(dim), deg_(degree) {
  if (dim < 1 || dim > kMaxDim || degree < 0 || degree > dim)
    throw std::invalid_argument("Form: bad dim/degree");
  c_.assign(choose(dim, degree), 0.0);
}

namespace {
// Returns (sorted mask, permutation sign), or sign 0 on repeated index.
std::pair<std::uint8_t, int> normalize(std::initializer_list<int> idx) {
  std::uint8_t mask = 0;
  int sign = 1;
  std::array<int, kMaxDim> buf{};
  int m = 0;
  for (int i : idx) {
    if (m >= kMaxDim || i < 0 || i >= kMaxDim) return {0, 0};
    buf[m++] = i;
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      if (buf[i] == buf[j]) return {0, 0};
      if (buf[i] > buf[j]) sign = -sign;
    }
  for (int i = 0; i < m; ++i) mask |= std::uint8_t(1u << buf[i]);
  return {mask, sign};
}
}  // namespace

double Form::component(std::initializer_list<int> indices) const {
  auto [mask, sign] = normalize(indices);
  if (sign == 0) return 0.0;
  const auto& t = BasisTable::get(dim_);
  return sign * c_[t.index[deg_][mask]];
}

void Form::set_component(std::initializer_list<int> indices, double value) {
  auto [mask, sign] = normalize(indices);
  if (sign == 0) throw std::invalid_argument("Form: repeated index");
  const auto& t = BasisTable::get(dim_);
  c_[t.index[deg_][mask]] = sign * value;
}

Form& Form::operator+=(const Form& o) {
  if (dim_ != o.dim_ || deg_ != o.deg_) throw std::invalid_argument("Form: mismatched shapes");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}
Form& Form::operator-=(const Form& o) {
  if (dim_ != o.dim_ || deg_ != o.deg_) throw std::invalid_argument("Form: mismatched shapes");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}
Form& Form::operator*=(double s) {
  for (auto& x : c_) x *= s;
  return *this;
}

double Form::max_abs() const {
  double m = 0;
  for (double x : c_) m = std::max(m, std::abs(x));
  return m;
}

Form wedge(const Form& a, const Form& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dim mismatch");
  const int d = a.dim(), ka = a.degree(), kb = b.degree();
  if (ka + kb > d) throw std::invalid_argument("wedge: degree overflow");
  const auto& t = BasisTable::get(d);
  Form out(d, ka + kb);
  const auto& sa = t.subsets[ka];
  const auto& sb = t.subsets[kb];
  for (int ia = 0; ia < static_cast<int>(sa.size()); ++ia) {
    const double va = a[ia];
    if (va == 0.0) continue;
    for (int ib = 0; ib < static_cast<int>(sb.size()); ++ib) {
      const double vb = b[ib];
      if (vb == 0.0) continue;
      if (sa[ia] & sb[ib]) continue;
      const std::uint8_t u = sa[ia] | sb[ib];
      out[t.index[ka + kb][u]] += merge_sign(sa[ia], sb[ib]) * va * vb;
    }
  }
  return out;
}

Form interior(std::span<const double> v, const Form& a) {
  const int d = a.dim(), k = a.degree();
  if (static_cast<int>(v.size()) != d) throw std::invalid_argument("interior: vector size");
  if (k < 1) throw std::invalid_argument("interior: degree 0 input");
  const auto& t = BasisTable::get(d);
  Form out(d, k - 1);
  const auto& sk = t.subsets[k];
  for (int i = 0; i < static_cast<int>(sk.size()); ++i) {
    const double va = a[i];
    if (va == 0.0) continue;
    std::uint8_t m = sk[i];
    int pos = 0;
    while (m) {
      const int j = std::countr_zero(m);
      const std::uint8_t rest = std::uint8_t(sk[i] & ~(1u << j));
      const double sign = (pos & 1) ? -1.0 : 1.0;
      out[t.index[k - 1][rest]] += sign * v[j] * va;
      m &= m - 1;
      ++pos;
    }
  }
  return out;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& ginv, int dim, int k) {
  const auto& t = BasisTable::get(dim);
  const auto& s = t.subsets[k];
  const int m = static_cast<int>(s.size());
  Eigen::MatrixXd G(m, m);
  std::array<int, kMaxDim> ia{}, ib{};
  for (int a = 0; a < m; ++a) {
    int na = 0;
    for (std::uint8_t x = s[a]; x; x &= x - 1) ia[na++] = std::countr_zero(x);
    for (int b = 0; b < m; ++b) {
      int nb = 0;
      for (std::uint8_t x = s[b]; x; x &= x - 1) ib[nb++] = std::countr_zero(x);
      if (k == 0) {
        G(a, b) = 1.0;
        continue;
      }
      Eigen::Matrix<double, kMaxDim, kMaxDim> M;
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) M(r, c) = ginv(ia[r], ib[c]);
      G(a, b) = M.topLeftCorner(k, k).determinant();
    }
  }
  return G;
}

StarOperator::StarOperator(Eigen::MatrixXd g, double vol_coeff)
    : dim_(static_cast<int>(g.rows())), g_(std::move(g)), vol_(vol_coeff) {
  if (vol_ == 0.0) throw std::invalid_argument("StarOperator: degenerate volume");
}

void StarOperator::build(int k) const {
  const auto& t = BasisTable::get(dim_);
  const Eigen::MatrixXd ginv = g_.inverse();
  const Eigen::MatrixXd G = gram(ginv, dim_, k);
  const auto& sk = t.subsets[k];
  const int m = static_cast<int>(sk.size());
  const std::uint8_t full = std::uint8_t((1u << dim_) - 1);
  // (star a)_{S^c} = merge_sign(S, S^c) * vol * (G a)_S
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(choose(dim_, dim_ - k), m);
  for (int i = 0; i < m; ++i) {
    const std::uint8_t sc = std::uint8_t(full & ~sk[i]);
    const int row = t.index[dim_ - k][sc];
    const double sgn = merge_sign(sk[i], sc) * vol_;
    for (int j = 0; j < m; ++j) M(row, j) += sgn * G(i, j);
  }
  op_[k] = std::move(M);
  built_[k] = true;
}

Form StarOperator::apply(const Form& a) const {
  if (a.dim() != dim_) throw std::invalid_argument("StarOperator: dim mismatch");
  const int k = a.degree();
  if (!built_[k]) build(k);
  Form out(dim_, dim_ - k);
  Eigen::Map<const Eigen::VectorXd> x(a.coeffs().data(), a.size());
  Eigen::Map<Eigen::VectorXd> y(out.coeffs().data(), out.size());
  y = op_[k] * x;
  return out;
}

}  // namespace g2flow::ext
