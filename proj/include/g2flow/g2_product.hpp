#pragma once

#include <string>

#include "g2flow/forms7.hpp"
#include "g2flow/product_form.hpp"

namespace g2flow::product {

enum class Mode { Flow, Coflow };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Geometry backing the product Hodge star: the 7-metric is
///   sum_i A_i(x) (dr^i)^2 + B(x) g_X(x)
/// with the scale factors determined by the ansatz family from s = |Omega|:
///   closed (flow):    A_1 = s^{-4/3}, other A_i = s^{2/3}, B = s^{2/3}
///   coclosed (coflow): A_1 = s^2,     other A_i = 1,       B = 1.
struct ProductMetric {
  Mode mode = Mode::Flow;
  TorusGrid grid;
  ScalarField s;                  // |Omega|_omega
  std::vector<ScalarField> gx;    // X metric, packed upper triangle (row-major)
  ScalarField volx;               // volume coefficient sqrt(det gx)

  Eigen::MatrixXd x_metric(std::size_t idx) const;
  void scales(std::size_t idx, double* A, double& B) const;
};

ProductMetric ansatz_metric(Mode mode, const kahler::HermitianMetricField& h);

/// The (omega, Omega, |Omega|) data of a Calabi-Yau structure as fields.
struct CyData {
  XFormField W;    // Kahler form
  XFormField reO;  // Re Omega, degree n
  XFormField imO;  // Im Omega
  ScalarField s;   // |Omega|_omega
};

CyData flat_cy_data(const kahler::HermitianMetricField& h);

/// Constant X-forms of the flat holomorphic volume form dz^1..dz^n.
XFormField flat_re_omega(const TorusGrid& g);
XFormField flat_im_omega(const TorusGrid& g);
/// Kahler form coefficients of a Hermitian metric field.
XFormField kahler_form(const kahler::HermitianMetricField& h);

struct Ansatz {
  ProductForm phi;
  ProductForm psi;
};

/// phi and its dual psi = star phi for the given ansatz family, from general
/// Calabi-Yau data. psi is assembled from the closed-form expressions; the
/// hodge_star_product consistency is a separate (tested) contract.
Ansatz assemble(Mode mode, const CyData& cy);
Ansatz assemble(Mode mode, const kahler::HermitianMetricField& h);

/// Product Hodge star via the weight table over the block structure, with the
/// unscaled X star applied pointwise.
ProductForm hodge_star_product(const ProductForm& a, const ProductMetric& m);

/// Codifferential and Hodge Laplacian d d* + d* d with d* = (-1)^k star d star.
ProductForm codifferential(const ProductForm& a, const ProductMetric& m);
ProductForm hodge_laplacian(const ProductForm& a, const ProductMetric& m);

struct LemmaReport {
  std::string id;          // e.g. "3.1"
  std::string description;
  int n = 2;
  Mode mode = Mode::Flow;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
};

struct LemmaOptions {
  int n = 2;
  int N = 16;
  Mode mode = Mode::Flow;
  double eps = 0.05;                      // metric perturbation amplitude
  std::array<int, 6> mode_k{1, 0, 1, 0, 0, 0};
  double tol_identity = 0;                // 0: default 1e-6 (n=2) / 1e-5 (n=3)
  double tol_vanishing = 1e-9;
  std::size_t torsion_sample_stride = 1;  // >1 subsamples the pointwise sweep
};

/// Residual verification of the closed/coclosed ansatz identities: the Hodge
/// Laplacian closed forms, the torsion patterns, duality psi = star phi,
/// (co)closedness, the block 7-metric, and the volume form.
std::vector<LemmaReport> verify_ansatz_lemmas(const LemmaOptions& opt);

/// Torsion components of a product form pair at one grid point, through the
/// pointwise 7-dimensional algebra.
forms7::TorsionForms torsion_at_point(const ProductForm& phi, const ProductForm& dphi,
                                      const ProductForm& dpsi, std::size_t idx);

}  // namespace g2flow::product
