#pragma once

#include "g2flow/flows.hpp"
#include "g2flow/g2_product.hpp"
#include "g2flow/kahler.hpp"
#include "g2flow/spectral.hpp"

namespace g2flow::deturck {

using product::Mode;

/// Gauge vector field of the ansatz family:
///   flow:   Y = -grad_h |Omega|_omega^{-2/3}
///   coflow: Y = +grad_h log |Omega|_omega
kahler::VectorFieldReal vector_field_Y(const kahler::HermitianMetricField& h, Mode mode);

/// Jacobian field D Theta = I + grad d (spectral), entries row-major a,b =
/// delta_ab + d(displacement_a)/dx_b.
struct JacobianField {
  TorusGrid grid;
  std::vector<ScalarField> entries;  // (2n)^2, row-major

  double det(std::size_t idx) const;
  Eigen::MatrixXd matrix(std::size_t idx) const;
  double min_det() const;
  double max_det() const;
};

JacobianField jacobian(const kahler::VectorFieldReal& displacement);

struct TrackSample {
  double t = 0;
  kahler::VectorFieldReal displacement;  // Theta(p) - p
  kahler::VectorFieldReal velocity;      // Y_t(Theta_t(p))
};

class DiffeoTrack {
 public:
  DiffeoTrack() = default;
  DiffeoTrack(const TorusGrid& g, Mode mode) : grid_(g), mode_(mode) {}

  const TorusGrid& grid() const { return grid_; }
  Mode mode() const { return mode_; }
  const std::vector<TrackSample>& samples() const { return samples_; }
  void append(TrackSample s) { samples_.push_back(std::move(s)); }

  /// Cubic-Hermite interpolation of the displacement between stored samples.
  kahler::VectorFieldReal displacement_at(double t) const;
  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }

 private:
  TorusGrid grid_;
  Mode mode_ = Mode::Flow;
  std::vector<TrackSample> samples_;
};

struct ThetaOptions {
  double dt = 5e-3;                // RK4 step for the trajectory ODE
  double interp_threshold = 1e-13; // significant-mode cutoff for off-grid Y
  int store_stride = 1;            // steps between stored samples
  bool check_jacobian = true;      // abort on det D Theta <= 0 at stored samples
};

/// Integrates d/dt Theta_t(p) = Y_t(Theta_t(p)), Theta_0 = id over the span
/// of the flow trace, evaluating Y off-grid by trigonometric interpolation
/// and between samples by cubic-Hermite interpolation of the potential.
DiffeoTrack integrate_theta(const flows::FlowTrace& trace, Mode mode,
                            const ThetaOptions& opt = {});

/// Pullbacks by Theta_t (displacement interpolated from the track).
ScalarField pullback_scalar(const DiffeoTrack& track, const ScalarField& f, double t,
                            double interp_threshold = 1e-13);
product::XFormField pullback_form(const DiffeoTrack& track, const product::XFormField& f,
                                  double t, double interp_threshold = 1e-13);
/// Pulled-back Riemannian metric D^T g(Theta) D, packed upper triangle.
std::vector<ScalarField> pullback_metric(const DiffeoTrack& track,
                                         const kahler::HermitianMetricField& h, double t,
                                         double interp_threshold = 1e-13);

/// |Omega_t|_{omega_t} from pulled-back data alone, via the wedge-ratio
/// identities  |Omega|^2 = (Re^2 + Im^2)/(4 vol_4)  (n=2) and
/// |Omega|^2 = (Re ^ Im)/(4 vol_6)  (n=3).
ScalarField norm_from_forms(const product::XFormField& W, const product::XFormField& reO,
                            const product::XFormField& imO);

/// The pulled-back Calabi-Yau data (omega_t, Omega_t, |Omega_t|) at time t.
product::CyData pullback_cy(const DiffeoTrack& track, const flows::FlowTrace& trace, double t,
                            double interp_threshold = 1e-13);

struct CoupledResidual {
  double residual_omega = 0;
  double residual_Omega = 0;
  double time = 0;
  Mode mode = Mode::Flow;
};

/// Residuals of the coupled evolution equations on pulled-back data:
///   flow:   d omega_t/dt = 2 L_{grad(|Omega_t|^{-2/3})} omega_t,
///           d Omega_t/dt = - L Omega_t
///   coflow: d omega_t/dt = - L_{grad(log|Omega_t|)} omega_t,
///           d Omega_t/dt = + L Omega_t.
/// At t=0 everything reduces to on-grid fields via the chain rule; at t>0 the
/// time derivatives come from centered differences of the pullbacks.
CoupledResidual verify_coupled(const flows::FlowTrace& trace, const DiffeoTrack& track,
                               Mode mode, double t, double dt_fd = 1e-3);

}  // namespace g2flow::deturck
