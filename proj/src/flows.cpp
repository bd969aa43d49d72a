#include "g2flow/flows.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "g2flow/spectral.hpp"

namespace g2flow::flows {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kRk4Stability = 2.785;  // |lambda dt| bound on the negative real axis
constexpr double kDetFloor = 1e-14;

double min_eig3_hermitian(const Eigen::Matrix3cd& H) {
  // closed-form smallest eigenvalue of a 3x3 Hermitian matrix
  const double q = H.trace().real() / 3.0;
  Eigen::Matrix3cd B = H - q * Eigen::Matrix3cd::Identity();
  const double p2 = (B * B).trace().real() / 6.0;
  if (p2 <= 0) return q;
  const double p = std::sqrt(p2);
  double r = (B / p).determinant().real() / 2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  // smallest root
  return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}
}  // namespace

std::string to_string(FlowKind k) {
  switch (k) {
    case FlowKind::MA13: return "ma13";
    case FlowKind::KR: return "kr";
    case FlowKind::GeneralH: return "h";
  }
  return "?";
}

FlowKind flow_kind_from_string(const std::string& s) {
  if (s == "ma13") return FlowKind::MA13;
  if (s == "kr") return FlowKind::KR;
  if (s == "h") return FlowKind::GeneralH;
  throw std::invalid_argument("unknown flow kind: " + s);
}

void FlowConfig::validate() const {
  if (dt <= 0) throw std::invalid_argument("FlowConfig: dt must be positive");
  if (t_max <= 0) throw std::invalid_argument("FlowConfig: t_max must be positive");
  if (kind == FlowKind::GeneralH && (h_power <= 0 || h_scale <= 0))
    throw std::invalid_argument("FlowConfig: H must be strictly increasing");
  if (field_stride < 1) throw std::invalid_argument("FlowConfig: field_stride >= 1");
}

ScalarField build_potential(const TorusGrid& g, const std::vector<PotentialMode>& modes) {
  ScalarField v(g);
  const int d = g.dims();
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.coords(i, x.data());
    double s = 0;
    for (const auto& m : modes) {
      double phase = 0;
      for (int a = 0; a < d; ++a) phase += m.k[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
      s += m.amplitude * std::cos(kTwoPi * phase);
    }
    v[i] = s;
  }
  return v;
}

namespace {
double apply_h(double det, FlowKind kind, double hp, double hs, std::size_t idx) {
  if (det <= kDetFloor)
    throw std::domain_error("flow rhs: determinant ratio " + std::to_string(det) +
                            " below floor at grid index " + std::to_string(idx));
  switch (kind) {
    case FlowKind::MA13: return 3.0 * std::cbrt(det);
    case FlowKind::KR: return std::log(det);
    case FlowKind::GeneralH: return hs * std::pow(det, hp);
  }
  return 0;
}
}  // namespace

ScalarField rhs_total(const ScalarField& w_total, FlowKind kind, double hp, double hs) {
  const kahler::HermitianMetricField h = kahler::metric_from_potential(w_total);
  std::size_t bad = 0;
  if (!kahler::is_positive_fast(h, &bad))
    throw std::domain_error("flow rhs: metric not positive at grid index " + std::to_string(bad));
  ScalarField out(w_total.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply_h(h.det(i), kind, hp, hs, i);
  return out;
}

double cfl_dt(const ScalarField& v, const ScalarField& u, FlowKind kind, double hp,
              double hs, double safety) {
  const TorusGrid& g = v.grid();
  ScalarField w = v;
  w += u;
  const kahler::HermitianMetricField h = kahler::metric_from_potential(w);
  double lam = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double det = h.det(i);
    double hprho;  // H'(rho) * rho
    switch (kind) {
      case FlowKind::MA13: hprho = std::cbrt(det); break;
      case FlowKind::KR: hprho = 1.0; break;
      case FlowKind::GeneralH: hprho = hs * hp * std::pow(det, hp); break;
    }
    double mineig;
    if (g.n == 2) {
      const double a = h.at(i, 0, 0).real(), b = h.at(i, 1, 1).real();
      const double off = std::abs(h.at(i, 0, 1));
      mineig = 0.5 * (a + b) - std::sqrt(0.25 * (a - b) * (a - b) + off * off);
    } else {
      mineig = min_eig3_hermitian(h.matrix(i));
    }
    if (mineig <= 0) throw std::domain_error("cfl_dt: metric not positive");
    lam = std::max(lam, hprho / mineig);
  }
  const double rate = lam * M_PI * M_PI * g.n * g.N * g.N / 2.0;
  return safety * kRk4Stability / rate;
}

StepResult step(const ScalarField& v, const ScalarField& u, double dt, FlowKind kind,
                double hp, double hs, int max_halvings) {
  const auto stage_rhs = [&](const ScalarField& uu) {
    ScalarField w = v;
    w += uu;
    return spectral::dealias(rhs_total(w, kind, hp, hs));
  };
  StepResult res;
  for (int attempt = 0; attempt <= max_halvings; ++attempt) {
    try {
      const ScalarField k1 = stage_rhs(u);
      ScalarField u2 = k1;
      u2 *= dt / 2;
      u2 += u;
      const ScalarField k2 = stage_rhs(u2);
      ScalarField u3 = k2;
      u3 *= dt / 2;
      u3 += u;
      const ScalarField k3 = stage_rhs(u3);
      ScalarField u4 = k3;
      u4 *= dt;
      u4 += u;
      const ScalarField k4 = stage_rhs(u4);
      ScalarField out = u;
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      ScalarField w = v;
      w += out;
      const auto h = kahler::metric_from_potential(w);
      std::size_t bad = 0;
      if (!kahler::is_positive_fast(h, &bad))
        throw std::domain_error("positivity lost at grid index " + std::to_string(bad));
      res.u = std::move(out);
      res.dt_used = dt;
      res.halvings = attempt;
      return res;
    } catch (const std::domain_error&) {
      if (attempt == max_halvings) throw;
      dt /= 2;
      if (dt < 1e-300) throw std::runtime_error("step: dt underflow");
    }
  }
  throw std::runtime_error("step: unreachable");
}

FlowTrace::FlowTrace(FlowConfig cfg, ScalarField v) : cfg_(std::move(cfg)), v_(std::move(v)) {}

ScalarField FlowTrace::total_potential(std::size_t i) const {
  ScalarField w = v_;
  w += samples_.at(i).u;
  return w;
}

ScalarField FlowTrace::normalized_potential(std::size_t i) const {
  const auto hbg = kahler::metric_from_potential(v_);
  ScalarField ones(v_.grid(), 1.0);
  const double vol = kahler::integrate(ones, hbg);
  ScalarField ut = samples_.at(i).u;
  const double avg = kahler::integrate(ut, hbg) / vol;
  for (std::size_t j = 0; j < ut.size(); ++j) ut[j] -= avg;
  return ut;
}

std::size_t FlowTrace::bracket(double t) const {
  if (samples_.size() < 2) throw std::runtime_error("FlowTrace: not enough samples");
  if (t < samples_.front().t - 1e-12 || t > samples_.back().t + 1e-12)
    throw std::out_of_range("FlowTrace: time outside trace");
  std::size_t lo = 0;
  while (lo + 2 < samples_.size() && samples_[lo + 1].t <= t) ++lo;
  return lo;
}

namespace {
// cubic Hermite basis on [0,1]
inline void hermite_weights(double s, double dt, double w[4]) {
  const double s2 = s * s, s3 = s2 * s;
  w[0] = 2 * s3 - 3 * s2 + 1;
  w[1] = (s3 - 2 * s2 + s) * dt;
  w[2] = -2 * s3 + 3 * s2;
  w[3] = (s3 - s2) * dt;
}
inline void hermite_dweights(double s, double dt, double w[4]) {
  const double s2 = s * s;
  w[0] = (6 * s2 - 6 * s) / dt;
  w[1] = 3 * s2 - 4 * s + 1;
  w[2] = (-6 * s2 + 6 * s) / dt;
  w[3] = 3 * s2 - 2 * s;
}
}  // namespace

ScalarField FlowTrace::potential_at(double t) const {
  const std::size_t i = bracket(t);
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  const double dt = b.t - a.t;
  const double s = (t - a.t) / dt;
  double w[4];
  hermite_weights(s, dt, w);
  ScalarField out(v_.grid());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = w[0] * a.u[j] + w[1] * a.dudt[j] + w[2] * b.u[j] + w[3] * b.dudt[j];
  return out;
}

ScalarField FlowTrace::dudt_at(double t) const {
  const std::size_t i = bracket(t);
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  const double dt = b.t - a.t;
  const double s = (t - a.t) / dt;
  double w[4];
  hermite_dweights(s, dt, w);
  ScalarField out(v_.grid());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = w[0] * a.u[j] + w[1] * a.dudt[j] + w[2] * b.u[j] + w[3] * b.dudt[j];
  return out;
}

void FlowTrace::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "t,osc_norm,min_eig,volume,limit_residual,dudt_osc\n";
  f << std::setprecision(17);
  for (const auto& r : rows_)
    f << r.t << ',' << r.osc_norm << ',' << r.min_eig << ',' << r.volume << ','
      << r.limit_residual << ',' << r.dudt_osc << '\n';
}

namespace {
DiagnosticsRow diagnostics(double t, const ScalarField& v, const ScalarField& u,
                           const ScalarField& dudt) {
  DiagnosticsRow r;
  r.t = t;
  ScalarField w = v;
  w += u;
  const auto h = kahler::metric_from_potential(w);
  const TorusGrid& g = v.grid();
  double det_min = 1e300, det_max = -1e300, vol = 0, mineig = 1e300, ratio = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double det = h.det(i);
    det_min = std::min(det_min, det);
    det_max = std::max(det_max, det);
    vol += det;
    ratio += (1.0 / det) * det;
    double me;
    if (g.n == 2) {
      const double a = h.at(i, 0, 0).real(), b = h.at(i, 1, 1).real();
      const double off = std::abs(h.at(i, 0, 1));
      me = 0.5 * (a + b) - std::sqrt(0.25 * (a - b) * (a - b) + off * off);
    } else {
      me = min_eig3_hermitian(h.matrix(i));
    }
    mineig = std::min(mineig, me);
  }
  if (det_min <= 0) throw std::domain_error("diagnostics: metric degenerate");
  r.osc_norm = 1.0 / std::sqrt(det_min) - 1.0 / std::sqrt(det_max);
  r.min_eig = mineig;
  r.volume = vol / static_cast<double>(w.size());
  r.limit_residual = limit_residual(v, u);
  r.dudt_osc = dudt.max() - dudt.min();
  r.omega_ratio = ratio / static_cast<double>(w.size());
  return r;
}
}  // namespace

double limit_residual(const ScalarField& v, const ScalarField& u) {
  const auto hbg = kahler::metric_from_potential(v);
  ScalarField w = v;
  w += u;
  const auto h = kahler::metric_from_potential(w);
  ScalarField ones(v.grid(), 1.0);
  // c0 = int omega^n / int |Omega|^2_omega omega^n; the second integral is the
  // flat lattice covolume on the torus
  const double c0 = kahler::integrate(ones, hbg) / 1.0;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num = std::max(num, std::abs(h.det(i) - c0));
    den = std::max(den, std::abs(hbg.det(i)));
  }
  return num / den;
}

FlowTrace run(const FlowConfig& cfg, std::optional<std::pair<double, ScalarField>> resume_state,
              const std::function<void(const DiagnosticsRow&)>& on_step) {
  cfg.validate();
  ScalarField v = build_potential(cfg.grid, cfg.initial_modes);
  FlowTrace trace(cfg, v);

  double t = 0;
  ScalarField u(cfg.grid);
  if (resume_state) {
    t = resume_state->first;
    u = std::move(resume_state->second);
  }

  {
    std::size_t bad = 0;
    ScalarField w = v;
    w += u;
    if (!kahler::is_positive_fast(kahler::metric_from_potential(w), &bad))
      throw std::domain_error("run: initial metric not positive at grid index " +
                              std::to_string(bad));
  }

  int step_index = 0;
  bool done = false;
  while (!done) {
    ScalarField w = v;
    w += u;
    const ScalarField dudt = rhs_total(w, cfg.kind, cfg.h_power, cfg.h_scale);
    DiagnosticsRow row = diagnostics(t, v, u, dudt);
    trace.append_row(row);
    if (on_step) on_step(row);
    if (step_index % cfg.field_stride == 0)
      trace.append_sample({t, u, dudt});

    if (row.dudt_osc <= cfg.eps_conv) {
      if (step_index % cfg.field_stride != 0) trace.append_sample({t, u, dudt});
      trace.set_stopped(true, "converged: osc(du/dt) <= eps_conv");
      break;
    }
    if (t >= cfg.t_max) {
      if (step_index % cfg.field_stride != 0) trace.append_sample({t, u, dudt});
      trace.set_stopped(false, "reached t_max");
      break;
    }

    double dt = std::min(cfg.dt, cfl_dt(v, u, cfg.kind, cfg.h_power, cfg.h_scale, cfg.cfl_safety));
    dt = std::min(dt, cfg.t_max - t);
    StepResult sr = step(v, u, dt, cfg.kind, cfg.h_power, cfg.h_scale, cfg.max_dt_halvings);
    u = std::move(sr.u);
    t += sr.dt_used;
    ++step_index;
  }
  return trace;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y,
                   double tail_fraction, std::size_t min_tail) {
  if (t.size() != y.size() || t.size() < min_tail)
    throw std::invalid_argument("decay_fit: need matching series with enough samples");
  double ymax = 0;
  for (double v : y) ymax = std::max(ymax, v);
  std::size_t begin = 0;
  while (begin < y.size() && y[begin] > tail_fraction * ymax) ++begin;
  if (y.size() - begin < min_tail) begin = y.size() - min_tail;

  DecayFit fit;
  fit.tail_begin = begin;
  fit.tail_size = y.size() - begin;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t i = begin; i < y.size(); ++i) {
    if (y[i] <= 0) continue;  // converged-to-zero tail entries carry no information
    const double ly = std::log(y[i]);
    sx += t[i]; sy += ly; sxx += t[i] * t[i]; sxy += t[i] * ly; syy += ly * ly;
    ++m;
    if (i + 1 < y.size() && y[i + 1] > y[i] * (1 + 1e-9)) fit.monotone_tail = false;
  }
  if (m < min_tail) throw std::invalid_argument("decay_fit: tail too short");
  const double md = static_cast<double>(m);
  const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
  fit.lambda = -slope;
  fit.log_c = (sy - slope * sx) / md;
  const double ss_tot = syy - sy * sy / md;
  double ss_res = 0;
  for (std::size_t i = begin; i < y.size(); ++i) {
    if (y[i] <= 0) continue;
    const double pred = fit.log_c + slope * t[i];
    ss_res += (std::log(y[i]) - pred) * (std::log(y[i]) - pred);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

DecayFit decay_fit(const FlowTrace& trace) {
  std::vector<double> t, y;
  for (const auto& r : trace.diagnostics()) {
    t.push_back(r.t);
    y.push_back(r.dudt_osc);
  }
  return decay_fit(t, y);
}

}  // namespace g2flow::flows
