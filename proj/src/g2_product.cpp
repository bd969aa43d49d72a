#include "g2flow/g2_product.hpp"

#include <bit>
#include <cmath>

#include "g2flow/flows.hpp"
#include "g2flow/spectral.hpp"

namespace g2flow::product {

using ext::BasisTable;
using ext::merge_sign;

std::string to_string(Mode m) { return m == Mode::Flow ? "flow" : "coflow"; }

Mode mode_from_string(const std::string& s) {
  if (s == "flow") return Mode::Flow;
  if (s == "coflow") return Mode::Coflow;
  throw std::invalid_argument("unknown mode: " + s);
}

Eigen::MatrixXd ProductMetric::x_metric(std::size_t idx) const {
  const int d = grid.dims();
  Eigen::MatrixXd g(d, d);
  int c = 0;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b, ++c) g(a, b) = g(b, a) = gx[static_cast<std::size_t>(c)][idx];
  return g;
}

void ProductMetric::scales(std::size_t idx, double* A, double& B) const {
  const double sv = s[idx];
  if (mode == Mode::Flow) {
    A[0] = std::pow(sv, -4.0 / 3.0);
    const double s23 = std::pow(sv, 2.0 / 3.0);
    for (int i = 1; i < circle_count(grid.n); ++i) A[i] = s23;
    B = s23;
  } else {
    A[0] = sv * sv;
    for (int i = 1; i < circle_count(grid.n); ++i) A[i] = 1.0;
    B = 1.0;
  }
}

ProductMetric ansatz_metric(Mode mode, const kahler::HermitianMetricField& h) {
  ProductMetric m;
  m.mode = mode;
  m.grid = h.grid();
  m.s = kahler::omega_norm(h);
  const int d = m.grid.dims();
  m.gx.assign(static_cast<std::size_t>(d * (d + 1) / 2), ScalarField(m.grid));
  m.volx = ScalarField(m.grid);
  Eigen::MatrixXd g;
  for (std::size_t i = 0; i < m.volx.size(); ++i) {
    h.real_metric(i, g);
    int c = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b, ++c) m.gx[static_cast<std::size_t>(c)][i] = g(a, b);
    m.volx[i] = h.det(i);  // sqrt(det g_real) for a Hermitian metric
  }
  return m;
}

XFormField flat_re_omega(const TorusGrid& g) {
  XFormField f(g, g.n);
  f.materialize();
  const auto& t = BasisTable::get(g.dims());
  auto set = [&](std::initializer_list<int> idx, double v) {
    std::uint8_t mask = 0;
    for (int i : idx) mask |= std::uint8_t(1u << i);
    ScalarField& c = f.comp(t.index[g.n][mask]);
    for (std::size_t p = 0; p < c.size(); ++p) c[p] = v;
  };
  if (g.n == 2) {
    set({0, 2}, 1.0);
    set({1, 3}, -1.0);
  } else {
    set({0, 2, 4}, 1.0);
    set({0, 3, 5}, -1.0);
    set({1, 2, 5}, -1.0);
    set({1, 3, 4}, -1.0);
  }
  return f;
}

XFormField flat_im_omega(const TorusGrid& g) {
  XFormField f(g, g.n);
  f.materialize();
  const auto& t = BasisTable::get(g.dims());
  auto set = [&](std::initializer_list<int> idx, double v) {
    std::uint8_t mask = 0;
    for (int i : idx) mask |= std::uint8_t(1u << i);
    ScalarField& c = f.comp(t.index[g.n][mask]);
    for (std::size_t p = 0; p < c.size(); ++p) c[p] = v;
  };
  if (g.n == 2) {
    set({0, 3}, 1.0);
    set({1, 2}, 1.0);
  } else {
    set({0, 2, 5}, 1.0);
    set({0, 3, 4}, 1.0);
    set({1, 2, 4}, 1.0);
    set({1, 3, 5}, -1.0);
  }
  return f;
}

XFormField kahler_form(const kahler::HermitianMetricField& h) {
  const TorusGrid& g = h.grid();
  XFormField f(g, 2);
  f.materialize();
  const auto& t = BasisTable::get(g.dims());
  Eigen::MatrixXd w;
  for (std::size_t i = 0; i < g.points(); ++i) {
    h.kahler_matrix(i, w);
    for (int a = 0; a < g.dims(); ++a)
      for (int b = a + 1; b < g.dims(); ++b) {
        const std::uint8_t mask = std::uint8_t((1u << a) | (1u << b));
        f.comp(t.index[2][mask])[i] = w(a, b);
      }
  }
  return f;
}

CyData flat_cy_data(const kahler::HermitianMetricField& h) {
  CyData cy;
  cy.W = kahler_form(h);
  cy.reO = flat_re_omega(h.grid());
  cy.imO = flat_im_omega(h.grid());
  cy.s = kahler::omega_norm(h);
  return cy;
}

namespace {
ScalarField pow_field(const ScalarField& s, double p) {
  ScalarField out = s;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(out[i], p);
  return out;
}

XFormField scaled(XFormField f, const ScalarField& s) {
  f.scale_by(s);
  return f;
}

XFormField scaled(XFormField f, double c) {
  f *= c;
  return f;
}

/// vol_X = W ^ W / 2 (n=2) or W^3/6 (n=3) computed through the wedge algebra.
XFormField volume_form(const TorusGrid& g, const XFormField& W) {
  ProductForm w2(g, 2);
  w2.set_block(0, W);
  ProductForm acc = wedge(w2, w2);
  if (g.n == 3) {
    acc = wedge(acc, w2);
    acc *= 1.0 / 6.0;
  } else {
    acc *= 0.5;
  }
  return acc.block(0);
}
}  // namespace

Ansatz assemble(Mode mode, const CyData& cy) {
  const TorusGrid& g = cy.W.grid();
  Ansatz a{ProductForm(g, 3), ProductForm(g, 4)};
  const XFormField volx = volume_form(g, cy.W);
  if (g.n == 2) {
    if (mode == Mode::Flow) {
      XFormField one(g, 0);
      one.comp(0) = ScalarField(g, -1.0);
      a.phi.set_block(0b111, std::move(one));
      a.phi.set_block(0b001, cy.W);
      a.phi.set_block(0b010, cy.reO);
      a.phi.set_block(0b100, cy.imO);
      const ScalarField s43 = pow_field(cy.s, 4.0 / 3.0);
      const ScalarField sm23 = pow_field(cy.s, -2.0 / 3.0);
      a.psi.set_block(0b000, scaled(scaled(volx, s43), -1.0));
      a.psi.set_block(0b110, scaled(cy.W, s43));
      a.psi.set_block(0b101, scaled(scaled(cy.reO, sm23), -1.0));  // dr3^dr1 ordering
      a.psi.set_block(0b011, scaled(cy.imO, sm23));
    } else {
      XFormField sneg(g, 0);
      sneg.comp(0) = cy.s;
      sneg *= -1.0;
      const ScalarField sinv = pow_field(cy.s, -1.0);
      a.phi.set_block(0b111, std::move(sneg));
      a.phi.set_block(0b001, scaled(cy.W, cy.s));
      a.phi.set_block(0b010, scaled(cy.reO, sinv));
      a.phi.set_block(0b100, scaled(cy.imO, sinv));
      a.psi.set_block(0b000, scaled(volx, -1.0));
      a.psi.set_block(0b110, cy.W);
      a.psi.set_block(0b101, scaled(cy.reO, -1.0));
      a.psi.set_block(0b011, cy.imO);
    }
  } else {
    if (mode == Mode::Flow) {
      a.phi.set_block(0b0, cy.reO);
      a.phi.set_block(0b1, scaled(cy.W, -1.0));
      a.psi.set_block(0b1, scaled(scaled(cy.imO, pow_field(cy.s, -2.0 / 3.0)), -1.0));
      a.psi.set_block(0b0, scaled(scaled(volx, pow_field(cy.s, 4.0 / 3.0)), -1.0));
    } else {
      // phi = Re(Omega/s) - dr ^ (s W),  psi = -dr ^ Im Omega - W^2/2
      a.phi.set_block(0b0, scaled(cy.reO, pow_field(cy.s, -1.0)));
      a.phi.set_block(0b1, scaled(scaled(cy.W, cy.s), -1.0));
      a.psi.set_block(0b1, scaled(cy.imO, -1.0));
      a.psi.set_block(0b0, scaled(volx, -1.0));
    }
  }
  return a;
}

Ansatz assemble(Mode mode, const kahler::HermitianMetricField& h) {
  return assemble(mode, flat_cy_data(h));
}

ProductForm hodge_star_product(const ProductForm& a, const ProductMetric& m) {
  const TorusGrid& g = a.grid();
  const int dx = g.dims();
  const int nc = circle_count(g.n);
  const auto& tx = BasisTable::get(dx);
  const std::uint8_t cfull = std::uint8_t((1u << nc) - 1);
  ProductForm out(g, 7 - a.degree());

  // collect present blocks and materialize their outputs
  struct BlockRef {
    std::uint8_t mask;
    const XFormField* in;
    XFormField* outp;
    int kx;
    int sign_base;  // (-1)^{kx |S^c|} merge_sign(S, S^c)
  };
  std::vector<BlockRef> blocks;
  for (std::uint8_t s = 0; s <= cfull; ++s) {
    if (!a.has_block(s)) continue;
    const XFormField& f = a.block(s);
    const std::uint8_t sc = std::uint8_t(cfull & ~s);
    const int kx = f.degree();
    const int ksc = std::popcount(sc);
    const int sgn = ((kx * ksc) % 2 ? -1 : 1) * merge_sign(s, sc);
    blocks.push_back({s, &f, &out.ensure_block(sc), kx, sgn});
  }
  if (blocks.empty()) return out;

  const std::size_t np = g.points();
  double A[3];
  double B;
  for (std::size_t idx = 0; idx < np; ++idx) {
    const Eigen::MatrixXd gxm = m.x_metric(idx);
    const ext::StarOperator star(gxm, m.volx[idx]);
    m.scales(idx, A, B);
    double prodA = 1, sqrtA = 1;
    for (int i = 0; i < nc; ++i) prodA *= A[i];
    sqrtA = std::sqrt(prodA);
    for (const auto& br : blocks) {
      // gather
      ext::Form v(dx, br.kx);
      for (int c = 0; c < v.size(); ++c) v[c] = br.in->comp(c)[idx];
      ext::Form sv = star.apply(v);
      double invA = 1;
      for (int i = 0; i < nc; ++i)
        if (br.mask & (1u << i)) invA /= A[i];
      const double w = br.sign_base * invA * std::pow(B, g.n - br.kx) * sqrtA;
      for (int c = 0; c < sv.size(); ++c) br.outp->comp(c)[idx] += w * sv[c];
    }
  }
  return out;
}

ProductForm codifferential(const ProductForm& a, const ProductMetric& m) {
  const int k = a.degree();
  ProductForm r = hodge_star_product(exterior_d(hodge_star_product(a, m)), m);
  if (k % 2) r *= -1.0;
  return r;
}

ProductForm hodge_laplacian(const ProductForm& a, const ProductMetric& m) {
  const int k = a.degree();
  ProductForm out(a.grid(), k);
  if (k > 0) out += exterior_d(codifferential(a, m));
  if (k < 7) out += codifferential(exterior_d(a), m);
  return out;
}

forms7::TorsionForms torsion_at_point(const ProductForm& phi, const ProductForm& dphi,
                                      const ProductForm& dpsi, std::size_t idx) {
  return forms7::torsion_decompose(phi.at_point(idx), dphi.at_point(idx), dpsi.at_point(idx));
}

namespace {

struct LemmaContext {
  TorusGrid grid;
  Mode mode;
  kahler::HermitianMetricField h;
  ProductMetric pm;
  Ansatz an;
  CyData cy;
};

void push(std::vector<LemmaReport>& out, const LemmaOptions& opt, std::string id,
          std::string desc, double residual, double tol) {
  out.push_back({std::move(id), std::move(desc), opt.n, opt.mode, residual, tol,
                 residual <= tol});
}

}  // namespace

std::vector<LemmaReport> verify_ansatz_lemmas(const LemmaOptions& opt) {
  const TorusGrid grid(opt.n, opt.N);
  const double tol = opt.tol_identity > 0 ? opt.tol_identity : (opt.n == 2 ? 1e-6 : 1e-5);

  double k2 = 0;
  for (int a = 0; a < grid.dims(); ++a)
    k2 += opt.mode_k[static_cast<std::size_t>(a)] * opt.mode_k[static_cast<std::size_t>(a)];
  flows::PotentialMode pmode;
  pmode.k = opt.mode_k;
  pmode.amplitude = k2 > 0 ? opt.eps / (M_PI * M_PI * k2) : 0.0;
  const ScalarField u = flows::build_potential(grid, {pmode});

  LemmaContext ctx{grid, opt.mode, kahler::metric_from_potential(u), {}, {}, {}};
  ctx.pm = ansatz_metric(opt.mode, ctx.h);
  ctx.cy = flat_cy_data(ctx.h);
  ctx.an = assemble(opt.mode, ctx.cy);

  std::vector<LemmaReport> out;
  const bool flow = opt.mode == Mode::Flow;
  const bool n2 = opt.n == 2;
  const std::string lap_id = flow ? (n2 ? "3.1" : "3.3") : (n2 ? "4.1" : "4.3");
  const std::string tor_id = flow ? (n2 ? "3.2" : "3.4") : (n2 ? "4.2" : "4.4");

  // duality of the assembled pair against the table star
  {
    const ProductForm psi_star = hodge_star_product(ctx.an.phi, ctx.pm);
    push(out, opt, "star", "psi = star(phi) (closed form vs product star)",
         ProductForm::sup_distance(psi_star, ctx.an.psi), tol);
  }

  // (co)closedness of the structure
  const ProductForm dphi = exterior_d(ctx.an.phi);
  const ProductForm dpsi = exterior_d(ctx.an.psi);
  push(out, opt, "closed", flow ? "d phi = 0 (closed ansatz)" : "d psi = 0 (coclosed ansatz)",
       flow ? dphi.sup_abs() : dpsi.sup_abs(), opt.tol_vanishing);

  // positivity of phi across the grid
  {
    double min_eig = 1e300;
    bool pos = true;
    for (std::size_t i = 0; i < grid.points(); i += opt.torsion_sample_stride) {
      const auto w = forms7::is_positive(ctx.an.phi.at_point(i));
      pos = pos && w.positive;
      min_eig = std::min(min_eig, w.min_eigenvalue);
    }
    push(out, opt, "positive", "phi positive at every grid point (min metric eigenvalue)",
         pos ? 0.0 : 1.0, 0.5);
    out.back().description += " = " + std::to_string(min_eig);
  }

  // block metric and volume of the pointwise metric extraction
  {
    double gerr = 0, verr = 0;
    double A[3];
    double B;
    const int nc = circle_count(opt.n);
    for (std::size_t i = 0; i < grid.points(); i += opt.torsion_sample_stride) {
      const auto pm7 = forms7::metric_from_phi(ctx.an.phi.at_point(i));
      Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(7, 7);
      ctx.pm.scales(i, A, B);
      for (int c = 0; c < nc; ++c) expect(c, c) = A[c];
      expect.block(nc, nc, grid.dims(), grid.dims()) = B * ctx.pm.x_metric(i);
      gerr = std::max(gerr, (pm7.g - expect).cwiseAbs().maxCoeff());
      double volA = 1;
      for (int c = 0; c < nc; ++c) volA *= A[c];
      verr = std::max(verr,
                      std::abs(pm7.vol_coeff - std::sqrt(volA) * std::pow(B, opt.n) * ctx.pm.volx[i]));
    }
    push(out, opt, "g7", "pointwise metric extraction reproduces the block 7-metric", gerr, 1e-9);
    push(out, opt, "vol7", "pointwise volume matches the block volume form", verr, 1e-9);
  }

  // Hodge Laplacian closed form
  {
    ScalarField sfield(grid);
    if (flow) {
      sfield = pow_field(ctx.pm.s, -2.0 / 3.0);
    } else {
      sfield = ctx.pm.s;
      for (std::size_t i = 0; i < sfield.size(); ++i) sfield[i] = std::log(sfield[i]);
    }
    const kahler::VectorFieldReal grad = kahler::gradient(ctx.h, sfield);
    ProductForm bracket(grid, flow ? 3 : 4);
    if (flow && n2) {
      bracket.set_block(0b001, scaled(ctx.cy.W, 2.0));
      bracket.set_block(0b010, scaled(ctx.cy.reO, -1.0));
      bracket.set_block(0b100, scaled(ctx.cy.imO, -1.0));
    } else if (flow && !n2) {
      bracket.set_block(0b0, scaled(ctx.cy.reO, -1.0));
      bracket.set_block(0b1, scaled(ctx.cy.W, -2.0));
    } else if (!flow && n2) {
      bracket.set_block(0b000, volume_form(grid, ctx.cy.W));
      bracket.set_block(0b110, scaled(ctx.cy.W, -1.0));
      bracket.set_block(0b101, scaled(ctx.cy.reO, -1.0));  // +dr3^dr1 ^ ReO
      bracket.set_block(0b011, ctx.cy.imO);
    } else {
      bracket.set_block(0b1, scaled(ctx.cy.imO, -1.0));
      bracket.set_block(0b0, scaled(volume_form(grid, ctx.cy.W), 1.0));
    }
    const ProductForm rhs = lie_derivative(grad, bracket);
    const ProductForm lhs = hodge_laplacian(flow ? ctx.an.phi : ctx.an.psi, ctx.pm);
    push(out, opt, lap_id,
         flow ? "Hodge Laplacian of phi equals its Lie-derivative closed form"
              : "Hodge Laplacian of psi equals its Lie-derivative closed form",
         ProductForm::sup_distance(lhs, rhs), tol);

    // torsion pattern via the pointwise decomposition
    ProductForm tau_formula = interior_x(grad, [&] {
      ProductForm b2(grid, flow ? 3 : 4);
      if (flow && n2) {
        b2.set_block(0b001, scaled(ctx.cy.W, -2.0));
        b2.set_block(0b010, ctx.cy.reO);
        b2.set_block(0b100, ctx.cy.imO);
      } else if (flow && !n2) {
        b2.set_block(0b0, ctx.cy.reO);
        b2.set_block(0b1, scaled(ctx.cy.W, 2.0));
      } else if (!flow && n2) {
        b2.set_block(0b000, volume_form(grid, ctx.cy.W));
        b2.set_block(0b110, scaled(ctx.cy.W, -1.0));
        b2.set_block(0b101, scaled(ctx.cy.reO, -1.0));
        b2.set_block(0b011, ctx.cy.imO);
      } else {
        b2.set_block(0b1, scaled(ctx.cy.imO, -1.0));
        b2.set_block(0b0, volume_form(grid, ctx.cy.W));
      }
      return b2;
    }());

    double tau_vanish = 0, tau_match = 0, rec = 0;
    for (std::size_t i = 0; i < grid.points(); i += opt.torsion_sample_stride) {
      const auto tf = torsion_at_point(ctx.an.phi, dphi, dpsi, i);
      const ext::Form formula_i = tau_formula.at_point(i);
      if (flow) {
        tau_vanish = std::max({tau_vanish, std::abs(tf.tau0), tf.tau1.max_abs(), tf.tau3.max_abs()});
        tau_match = std::max(tau_match, (tf.tau2 - formula_i).max_abs());
      } else {
        tau_vanish = std::max({tau_vanish, std::abs(tf.tau0), tf.tau1.max_abs(), tf.tau2.max_abs()});
        tau_match = std::max(tau_match, (tf.tau3 - formula_i).max_abs());
      }
      rec = std::max({rec, tf.residual_dphi, tf.residual_dpsi});
    }
    push(out, opt, tor_id,
         flow ? "tau2 matches the hook closed form" : "tau3 matches the hook closed form",
         tau_match, tol);
    push(out, opt, tor_id + "v",
         flow ? "tau0, tau1, tau3 vanish for the closed ansatz"
              : "tau0, tau1, tau2 vanish for the coclosed ansatz",
         tau_vanish, opt.tol_vanishing);
    push(out, opt, "rec", "torsion reconstruction residuals", rec, opt.tol_vanishing * 10);
  }

  // phi ^ dphi vanishes (the scalar-torsion mechanism of the coclosed proof)
  {
    const ProductForm pdp = wedge(ctx.an.phi, dphi);
    push(out, opt, "phidphi", "phi ^ d phi = 0 by direct wedge", pdp.sup_abs(),
         opt.tol_vanishing * 10);
  }

  return out;
}

}  // namespace g2flow::product
