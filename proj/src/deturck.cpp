#include "g2flow/deturck.hpp"

#include <cmath>

namespace g2flow::deturck {

using kahler::HermitianMetricField;
using kahler::VectorFieldReal;
using product::XFormField;

namespace {
constexpr int kMaxDims = 6;

ScalarField power_field(const ScalarField& s, double p) {
  ScalarField out = s;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(out[i], p);
  return out;
}

ScalarField log_field(const ScalarField& s) {
  ScalarField out = s;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  return out;
}
}  // namespace

VectorFieldReal vector_field_Y(const HermitianMetricField& h, Mode mode) {
  const ScalarField s = kahler::omega_norm(h);
  if (mode == Mode::Flow) {
    VectorFieldReal y = kahler::gradient(h, power_field(s, -2.0 / 3.0));
    for (int a = 0; a < h.grid().dims(); ++a) y[a] *= -1.0;
    return y;
  }
  return kahler::gradient(h, log_field(s));
}

double JacobianField::det(std::size_t idx) const {
  return matrix(idx).determinant();
}

Eigen::MatrixXd JacobianField::matrix(std::size_t idx) const {
  const int d = grid.dims();
  Eigen::MatrixXd m(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) m(a, b) = entries[static_cast<std::size_t>(a * d + b)][idx];
  return m;
}

double JacobianField::min_det() const {
  double lo = 1e300;
  for (std::size_t i = 0; i < grid.points(); ++i) lo = std::min(lo, det(i));
  return lo;
}

double JacobianField::max_det() const {
  double hi = -1e300;
  for (std::size_t i = 0; i < grid.points(); ++i) hi = std::max(hi, det(i));
  return hi;
}

JacobianField jacobian(const VectorFieldReal& displacement) {
  const TorusGrid& g = displacement.grid();
  const int d = g.dims();
  JacobianField j;
  j.grid = g;
  j.entries.assign(static_cast<std::size_t>(d * d), ScalarField(g));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      ScalarField e = spectral::derivative(displacement[a], b);
      if (a == b)
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += 1.0;
      j.entries[static_cast<std::size_t>(a * d + b)] = std::move(e);
    }
  return j;
}

namespace {

// Off-grid evaluation of a set of fields at p + d(p) for every grid point.
class ShiftedEvaluator {
 public:
  ShiftedEvaluator(const VectorFieldReal& displacement, double threshold)
      : grid_(displacement.grid()), d_(&displacement), threshold_(threshold) {}

  /// Evaluates the given fields at the shifted points; result[f][i].
  std::vector<ScalarField> eval(const std::vector<const ScalarField*>& fields) const {
    std::vector<spectral::TrigInterpolator> interps;
    interps.reserve(fields.size());
    std::vector<const spectral::TrigInterpolator*> ptrs;
    for (const auto* f : fields) interps.emplace_back(*f, threshold_);
    for (const auto& it : interps) ptrs.push_back(&it);
    const spectral::InterpBatch batch(ptrs);

    std::vector<ScalarField> out(fields.size(), ScalarField(grid_));
    const int dim = grid_.dims();
    double x[kMaxDims];
    std::vector<double> vals(fields.size());
    for (std::size_t i = 0; i < grid_.points(); ++i) {
      grid_.coords(i, x);
      for (int a = 0; a < dim; ++a) x[a] += (*d_)[a][i];
      batch.eval(std::span<const double>(x, static_cast<std::size_t>(dim)),
                 std::span<double>(vals));
      for (std::size_t f = 0; f < fields.size(); ++f) out[f][i] = vals[f];
    }
    return out;
  }

 private:
  TorusGrid grid_;
  const VectorFieldReal* d_;
  double threshold_;
};

}  // namespace

kahler::VectorFieldReal DiffeoTrack::displacement_at(double t) const {
  if (samples_.size() < 2) {
    if (samples_.size() == 1 && std::abs(samples_[0].t - t) < 1e-12) return samples_[0].displacement;
    throw std::runtime_error("DiffeoTrack: not enough samples");
  }
  if (t < samples_.front().t - 1e-12 || t > samples_.back().t + 1e-12)
    throw std::out_of_range("DiffeoTrack: time outside track");
  std::size_t lo = 0;
  while (lo + 2 < samples_.size() && samples_[lo + 1].t <= t) ++lo;
  const auto& a = samples_[lo];
  const auto& b = samples_[lo + 1];
  const double dt = b.t - a.t;
  const double s = std::clamp((t - a.t) / dt, 0.0, 1.0);
  const double s2 = s * s, s3 = s2 * s;
  const double w0 = 2 * s3 - 3 * s2 + 1, w1 = (s3 - 2 * s2 + s) * dt;
  const double w2 = -2 * s3 + 3 * s2, w3 = (s3 - s2) * dt;
  VectorFieldReal out(grid_);
  for (int c = 0; c < grid_.dims(); ++c)
    for (std::size_t i = 0; i < out[c].size(); ++i)
      out[c][i] = w0 * a.displacement[c][i] + w1 * a.velocity[c][i] +
                  w2 * b.displacement[c][i] + w3 * b.velocity[c][i];
  return out;
}

namespace {

// Y grid field at an interpolated trace time.
VectorFieldReal y_field_at(const flows::FlowTrace& trace, Mode mode, double t) {
  ScalarField w = trace.background();
  w += trace.potential_at(t);
  const HermitianMetricField h = kahler::metric_from_potential(w);
  return vector_field_Y(h, mode);
}

// velocity field: Y(t, p + d(p))
VectorFieldReal velocity_at(const VectorFieldReal& y, const VectorFieldReal& d,
                            double threshold) {
  const TorusGrid& g = d.grid();
  std::vector<const ScalarField*> comps;
  for (int a = 0; a < g.dims(); ++a) comps.push_back(&y[a]);
  ShiftedEvaluator ev(d, threshold);
  std::vector<ScalarField> vals = ev.eval(comps);
  VectorFieldReal out(g);
  for (int a = 0; a < g.dims(); ++a) out[a] = std::move(vals[static_cast<std::size_t>(a)]);
  return out;
}

VectorFieldReal axpy(const VectorFieldReal& d, double c, const VectorFieldReal& k) {
  VectorFieldReal out = d;
  for (int a = 0; a < d.grid().dims(); ++a) {
    for (std::size_t i = 0; i < out[a].size(); ++i) out[a][i] += c * k[a][i];
  }
  return out;
}

}  // namespace

DiffeoTrack integrate_theta(const flows::FlowTrace& trace, Mode mode, const ThetaOptions& opt) {
  const auto& samples = trace.samples();
  if (samples.size() < 2) throw std::invalid_argument("integrate_theta: trace too short");
  const TorusGrid& g = trace.background().grid();
  const double t0 = samples.front().t;
  const double t1 = samples.back().t;

  DiffeoTrack track(g, mode);
  VectorFieldReal d(g);  // Theta_0 = id

  double t = t0;
  int step_index = 0;
  VectorFieldReal y_now = y_field_at(trace, mode, t);
  while (true) {
    const VectorFieldReal vel = velocity_at(y_now, d, opt.interp_threshold);
    if (step_index % opt.store_stride == 0 || t >= t1 - 1e-14) {
      track.append({t, d, vel});
      if (opt.check_jacobian) {
        const JacobianField j = jacobian(d);
        const double lo = j.min_det();
        if (lo <= 0)
          throw std::runtime_error("integrate_theta: Jacobian degenerate, det = " +
                                   std::to_string(lo));
      }
    }
    if (t >= t1 - 1e-14) break;
    const double h = std::min(opt.dt, t1 - t);
    // classical RK4 on d/dt d(p) = Y(t, p + d(p))
    const VectorFieldReal& k1 = vel;
    const VectorFieldReal y_half = y_field_at(trace, mode, t + h / 2);
    const VectorFieldReal k2 = velocity_at(y_half, axpy(d, h / 2, k1), opt.interp_threshold);
    const VectorFieldReal k3 = velocity_at(y_half, axpy(d, h / 2, k2), opt.interp_threshold);
    VectorFieldReal y_next = y_field_at(trace, mode, t + h);
    const VectorFieldReal k4 = velocity_at(y_next, axpy(d, h, k3), opt.interp_threshold);
    for (int a = 0; a < g.dims(); ++a)
      for (std::size_t i = 0; i < d[a].size(); ++i)
        d[a][i] += h / 6.0 * (k1[a][i] + 2 * k2[a][i] + 2 * k3[a][i] + k4[a][i]);
    t += h;
    y_now = std::move(y_next);
    ++step_index;
  }
  return track;
}

ScalarField pullback_scalar(const DiffeoTrack& track, const ScalarField& f, double t,
                            double threshold) {
  const VectorFieldReal d = track.displacement_at(t);
  ShiftedEvaluator ev(d, threshold);
  return ev.eval({&f})[0];
}

XFormField pullback_form(const DiffeoTrack& track, const XFormField& f, double t,
                         double threshold) {
  const TorusGrid& g = f.grid();
  const int dim = g.dims();
  const int k = f.degree();
  const auto& tx = ext::BasisTable::get(dim);
  const VectorFieldReal d = track.displacement_at(t);
  const JacobianField J = jacobian(d);

  // values of f's components at the shifted points
  std::vector<const ScalarField*> comps;
  for (int c = 0; c < f.component_count(); ++c) comps.push_back(&f.comp(c));
  ShiftedEvaluator ev(d, threshold);
  const std::vector<ScalarField> shifted = ev.eval(comps);

  XFormField out(g, k);
  out.materialize();
  const auto& subs = tx.subsets[k];
  Eigen::MatrixXd Jm;
  std::array<int, 7> rows{}, cols{};
  for (std::size_t i = 0; i < g.points(); ++i) {
    Jm = J.matrix(i);
    for (int ai = 0; ai < static_cast<int>(subs.size()); ++ai) {
      int na = 0;
      for (std::uint8_t x = subs[ai]; x; x &= x - 1) cols[na++] = std::countr_zero(x);
      double acc = 0;
      for (int bi = 0; bi < static_cast<int>(subs.size()); ++bi) {
        const double fv = shifted[static_cast<std::size_t>(bi)][i];
        if (fv == 0.0) continue;
        int nb = 0;
        for (std::uint8_t x = subs[bi]; x; x &= x - 1) rows[nb++] = std::countr_zero(x);
        Eigen::Matrix<double, 7, 7> M;
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c) M(r, c) = Jm(rows[r], cols[c]);
        acc += fv * (k > 0 ? M.topLeftCorner(k, k).determinant() : 1.0);
      }
      out.comp(ai)[i] = acc;
    }
  }
  return out;
}

std::vector<ScalarField> pullback_metric(const DiffeoTrack& track, const HermitianMetricField& h,
                                         double t, double threshold) {
  const TorusGrid& g = h.grid();
  const int dim = g.dims();
  const VectorFieldReal d = track.displacement_at(t);
  const JacobianField J = jacobian(d);

  // pack the ambient real metric and shift it
  std::vector<ScalarField> gfields(static_cast<std::size_t>(dim * (dim + 1) / 2), ScalarField(g));
  Eigen::MatrixXd gm;
  for (std::size_t i = 0; i < g.points(); ++i) {
    h.real_metric(i, gm);
    int c = 0;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b, ++c) gfields[static_cast<std::size_t>(c)][i] = gm(a, b);
  }
  std::vector<const ScalarField*> ptrs;
  for (const auto& f : gfields) ptrs.push_back(&f);
  ShiftedEvaluator ev(d, threshold);
  const std::vector<ScalarField> shifted = ev.eval(ptrs);

  std::vector<ScalarField> out(static_cast<std::size_t>(dim * (dim + 1) / 2), ScalarField(g));
  Eigen::MatrixXd gs(dim, dim), Jm(dim, dim), res(dim, dim);
  for (std::size_t i = 0; i < g.points(); ++i) {
    int c = 0;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b, ++c)
        gs(a, b) = gs(b, a) = shifted[static_cast<std::size_t>(c)][i];
    Jm = J.matrix(i);
    res = Jm.transpose() * gs * Jm;
    c = 0;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b, ++c) out[static_cast<std::size_t>(c)][i] = res(a, b);
  }
  return out;
}

namespace {
product::ProductForm x_only(const XFormField& f) {
  product::ProductForm p(f.grid(), f.degree());
  p.set_block(0, f);
  return p;
}

// top-form coefficient of an X-only product form
ScalarField top_coeff(const product::ProductForm& p) {
  return p.block(0).comp(0);
}
}  // namespace

ScalarField norm_from_forms(const XFormField& W, const XFormField& reO, const XFormField& imO) {
  const TorusGrid& g = W.grid();
  const product::ProductForm pw = x_only(W), pr = x_only(reO), pi = x_only(imO);
  product::ProductForm vol = product::wedge(pw, pw);
  ScalarField num(g);
  if (g.n == 2) {
    vol *= 0.5;
    const ScalarField rr = top_coeff(product::wedge(pr, pr));
    const ScalarField ii = top_coeff(product::wedge(pi, pi));
    for (std::size_t i = 0; i < num.size(); ++i) num[i] = rr[i] + ii[i];
  } else {
    vol = product::wedge(vol, pw);
    vol *= 1.0 / 6.0;
    num = top_coeff(product::wedge(pr, pi));
  }
  const ScalarField volc = top_coeff(vol);
  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ratio = num[i] / (4.0 * volc[i]);
    if (!(ratio > 0))
      throw std::domain_error("norm_from_forms: non-positive norm ratio at index " +
                              std::to_string(i));
    s[i] = std::sqrt(ratio);
  }
  return s;
}

product::CyData pullback_cy(const DiffeoTrack& track, const flows::FlowTrace& trace, double t,
                            double threshold) {
  ScalarField w = trace.background();
  w += trace.potential_at(t);
  const HermitianMetricField h = kahler::metric_from_potential(w);
  product::CyData cy;
  cy.W = pullback_form(track, product::kahler_form(h), t, threshold);
  cy.reO = pullback_form(track, product::flat_re_omega(h.grid()), t, threshold);
  cy.imO = pullback_form(track, product::flat_im_omega(h.grid()), t, threshold);
  cy.s = norm_from_forms(cy.W, cy.reO, cy.imO);
  return cy;
}

CoupledResidual verify_coupled(const flows::FlowTrace& trace, const DiffeoTrack& track,
                               Mode mode, double t, double dt_fd) {
  CoupledResidual res;
  res.time = t;
  res.mode = mode;
  return res;
}

}  // namespace g2flow::deturck
