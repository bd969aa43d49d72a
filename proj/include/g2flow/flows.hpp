#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "g2flow/grid.hpp"
#include "g2flow/kahler.hpp"

namespace g2flow::flows {

enum class FlowKind { MA13, KR, GeneralH };

std::string to_string(FlowKind k);
FlowKind flow_kind_from_string(const std::string& s);

/// One Fourier mode of the initial potential: amplitude * cos(2 pi k. x).
struct PotentialMode {
  std::array<int, 6> k{};  // first 2n entries used
  double amplitude = 0.0;
};

struct FlowConfig {
  FlowKind kind = FlowKind::MA13;
  TorusGrid grid{2, 16};
  std::vector<PotentialMode> initial_modes;  // background v; flow starts at u=0
  double dt = 1e-3;          // requested step, capped by the CFL bound
  double t_max = 5.0;
  double eps_conv = 1e-7;    // on osc(du/dt)
  // GeneralH: H(rho) = h_scale * rho^h_power, strictly increasing on (0,inf)
  double h_power = 1.0 / 3.0;
  double h_scale = 3.0;
  double cfl_safety = 0.8;
  int field_stride = 5;      // steps between stored (u, du/dt) samples
  int max_dt_halvings = 25;

  void validate() const;
};

/// Initial potential from the mode list.
ScalarField build_potential(const TorusGrid& g, const std::vector<PotentialMode>& modes);

/// Pointwise flow velocity H(det h) for the unit-covolume torus, where h is
/// the metric of omega_0 + i ddbar(w) and w is the total potential
/// (background + evolving part). The determinant ratio absorbs the
/// e^{-2 log|Omega|} weight exactly since Omega = dz^1..dz^n has |f| = 1.
ScalarField rhs_total(const ScalarField& w_total, FlowKind kind, double h_power,
                      double h_scale);

struct StepResult {
  ScalarField u;      // advanced evolving potential
  double dt_used = 0; // after any halvings
  int halvings = 0;
};

/// One RK4 step of du/dt = H(det h(v+u)); stage derivatives are 2/3-rule
/// dealiased. Positivity is re-verified on the result; on failure the step is
/// retried with dt/2 up to max_halvings times.
StepResult step(const ScalarField& v, const ScalarField& u, double dt, FlowKind kind,
                double h_power, double h_scale, int max_halvings = 25);

/// CFL bound for the requested grid/state: dt <= safety * 2.785 / rate where
/// rate = sup[H'(rho) rho / lambda_min(h)] * pi^2 * n * N^2 / 2.
double cfl_dt(const ScalarField& v, const ScalarField& u, FlowKind kind, double h_power,
              double h_scale, double safety);

struct DiagnosticsRow {
  double t = 0;
  double osc_norm = 0;        // osc of |Omega|_{omega_t}
  double min_eig = 0;         // pointwise smallest metric eigenvalue, global min
  double volume = 0;          // integral of omega_t^n / n!
  double limit_residual = 0;
  double dudt_osc = 0;
  double omega_ratio = 0;     // integral of |Omega|^2_{omega_t} omega_t^n/n!
};

struct TraceSample {
  double t = 0;
  ScalarField u;
  ScalarField dudt;
};

class FlowTrace {
 public:
  FlowTrace() = default;
  FlowTrace(FlowConfig cfg, ScalarField v);

  const FlowConfig& config() const { return cfg_; }
  const ScalarField& background() const { return v_; }
  const std::vector<DiagnosticsRow>& diagnostics() const { return rows_; }
  const std::vector<TraceSample>& samples() const { return samples_; }
  bool converged() const { return converged_; }
  const std::string& stop_reason() const { return stop_reason_; }
  double final_time() const { return rows_.empty() ? 0.0 : rows_.back().t; }

  /// u_t normalized to integrate to zero against the background measure.
  ScalarField normalized_potential(std::size_t sample_index) const;
  ScalarField total_potential(std::size_t sample_index) const;

  /// Cubic-Hermite interpolation between stored samples.
  ScalarField potential_at(double t) const;
  ScalarField dudt_at(double t) const;

  void append_row(const DiagnosticsRow& r) { rows_.push_back(r); }
  void append_sample(TraceSample s) { samples_.push_back(std::move(s)); }
  void set_stopped(bool converged, std::string reason) {
    converged_ = converged;
    stop_reason_ = std::move(reason);
  }

  void write_csv(const std::string& path) const;

 private:
  std::size_t bracket(double t) const;
  FlowConfig cfg_;
  ScalarField v_;
  std::vector<DiagnosticsRow> rows_;
  std::vector<TraceSample> samples_;
  bool converged_ = false;
  std::string stop_reason_;
};

/// Runs the flow until osc(du/dt) <= eps_conv or t_max. Optionally resumes
/// from a given (t0, u0) state; progress callback fires per accepted step.
FlowTrace run(const FlowConfig& cfg,
              std::optional<std::pair<double, ScalarField>> resume_state = {},
              const std::function<void(const DiagnosticsRow&)>& on_step = {});

/// Residual of the stationary equation omega_cy^n = c0 |Omega|^2_omega omega^n
/// for the current total potential, sup-normalized by |omega^n|.
double limit_residual(const ScalarField& v, const ScalarField& u);

struct DecayFit {
  double lambda = 0;   // decay rate
  double log_c = 0;    // intercept
  double r2 = 0;       // goodness of fit
  bool monotone_tail = true;
  std::size_t tail_begin = 0;
  std::size_t tail_size = 0;
};

/// Least-squares fit of log y against t on the tail of (t, y) data.
/// The tail starts once y has dropped below tail_fraction * max(y); at least
/// min_tail points are required.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y,
                   double tail_fraction = 0.1, std::size_t min_tail = 20);
DecayFit decay_fit(const FlowTrace& trace);

}  // namespace g2flow::flows
