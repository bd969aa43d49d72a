#pragma once

#include <array>
#include <span>
#include <vector>

#include "g2flow/grid.hpp"

namespace g2flow::spectral {

/// Forward DFT of a real or complex field, normalized by 1/points so that
/// coefficients are the trigonometric-polynomial amplitudes. Transforms share
/// cached FFTW plans behind one mutex; the field data itself is never shared.
ComplexField fft(const ScalarField& f);
ComplexField fft(const ComplexField& f);
/// Inverse of fft (amplitude-normalized spectrum in, values out).
ComplexField ifft(const ComplexField& spec);
ScalarField ifft_real(const ComplexField& spec);

/// Signed mode number for index i along one axis: i, or i-N for i > N/2.
/// The Nyquist mode N/2 maps to 0 so odd-order derivative symbols vanish.
int signed_mode(int i, int N);

/// Spectral partial derivative along real axis `axis` (0-based).
ScalarField derivative(const ScalarField& f, int axis);
ComplexField derivative(const ComplexField& f, int axis);

/// d/dz^p = (d_{2p-1} - i d_{2p})/2 and d/dzbar^p, p 0-based.
ComplexField dz(const ScalarField& f, int p);
ComplexField dzbar(const ScalarField& f, int p);
ComplexField dz(const ComplexField& f, int p);
ComplexField dzbar(const ComplexField& f, int p);

/// Mixed complex Hessian d^2 f / dz^p dzbar^q of a real field.
ComplexField hessian_pq(const ScalarField& f, int p, int q);

/// 2/3-rule truncation: zero all modes with |k_a| > N/3 on any axis.
ScalarField dealias(const ScalarField& f);

/// Trigonometric interpolation of a periodic grid field. The interpolant is
/// the band-limited Fourier series of the samples; modes with amplitude below
/// rel_threshold * max|amplitude| are dropped (0 keeps every mode, which is
/// the exact direct-sum evaluation used as the verification fallback).
class TrigInterpolator {
 public:
  TrigInterpolator() = default;
  explicit TrigInterpolator(const ScalarField& f, double rel_threshold = 1e-13);

  const TorusGrid& grid() const { return grid_; }
  std::size_t mode_count() const { return ks_.size() / dims_; }

  double operator()(std::span<const double> x) const;

 private:
  friend class InterpBatch;
  TorusGrid grid_;
  int dims_ = 0;
  std::vector<int> ks_;        // packed signed modes, dims_ per entry
  std::vector<Complex> cs_;    // amplitudes
};

/// Evaluates several interpolators on the same grid at one point, sharing the
/// per-axis phase tables. Used for vector fields and tensor components.
class InterpBatch {
 public:
  explicit InterpBatch(std::vector<const TrigInterpolator*> comps);
  void eval(std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<const TrigInterpolator*> comps_;
  TorusGrid grid_;
  int dims_ = 0;
};

}  // namespace g2flow::spectral
