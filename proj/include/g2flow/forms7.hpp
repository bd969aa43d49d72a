#pragma once

#include <optional>

#include "g2flow/exterior.hpp"

namespace g2flow::forms7 {

using PointForm = ext::Form;

inline PointForm make_form(int degree) { return PointForm(7, degree); }

/// Metric and oriented volume induced by a 3-form via
///   -1/6 (e_i hook phi) ^ (e_j hook phi) ^ phi = B_ij e^{1..7},
///   vol = (det B)^{1/9} e^{1..7},  g = B / (det B)^{1/9}.
/// The ninth root keeps its sign, so g is recovered for either orientation;
/// positivity additionally demands det B > 0 under the fixed orientation
/// e^1 ^ ... ^ e^7 > 0.
struct PointMetric {
  Eigen::Matrix<double, 7, 7> g;
  double vol_coeff = 0.0;  // coefficient of vol over e^{1..7}

  ext::StarOperator star() const { return ext::StarOperator(g, vol_coeff); }
};

PointMetric metric_from_phi(const PointForm& phi);

struct PositivityWitness {
  bool positive = false;
  double min_eigenvalue = 0.0;  // of the candidate metric
  double det_b = 0.0;
};

PositivityWitness is_positive(const PointForm& phi);

PointForm hodge_star(const PointMetric& m, const PointForm& a);

struct TorsionForms {
  double tau0 = 0.0;
  PointForm tau1;  // degree 1
  PointForm tau2;  // degree 2
  PointForm tau3;  // degree 3
  // sup-norm residuals of the two defining equations, reconstructed from the
  // extracted components
  double residual_dphi = 0.0;
  double residual_dpsi = 0.0;
};

/// Torsion components of a positive 3-form given dphi and dpsi:
///   dphi = tau0 psi + 3 tau1 ^ phi + star tau3
///   dpsi = 4 tau1 ^ psi + star tau2
/// tau0 = 1/7 star(phi ^ dphi), tau1 = 1/12 star(phi ^ star dphi); tau2 and
/// tau3 are recovered from the residuals of the defining equations.
TorsionForms torsion_decompose(const PointForm& phi, const PointForm& dphi,
                               const PointForm& dpsi);

/// Canonical positive 3-form in this sign convention (the flat-point product
/// ansatz): -e123 + e145 + e167 + e246 - e257 + e347 + e356.
/// metric_from_phi gives the identity metric and vol = +e^{1..7}.
PointForm standard_phi();
PointForm standard_psi();

/// The opposite-orientation classic: e123 + e145 + e167 + e246 - e257 - e347
/// - e356. Induces the identity metric with vol = -e^{1..7}, hence is not
/// positive under the orientation fixed here.
PointForm classic_phi0();

}  // namespace g2flow::forms7
