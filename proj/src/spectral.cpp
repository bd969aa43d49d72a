#include "g2flow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

namespace g2flow::spectral {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// FFTW plan creation is not thread-safe; executions on distinct arrays are.
// Plans are cached per (dims, N, direction) and executed via the new-array
// interface.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  void execute(const TorusGrid& g, int sign, Complex* in, Complex* out) {
    fftw_plan p;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const Key key{g.dims(), g.N, sign};
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<int> dims(static_cast<std::size_t>(g.dims()), g.N);
        std::vector<Complex> buf(g.points());
        p = fftw_plan_dft(g.dims(), dims.data(),
                          reinterpret_cast<fftw_complex*>(buf.data()),
                          reinterpret_cast<fftw_complex*>(buf.data()), sign,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, p);
      } else {
        p = it->second;
      }
    }
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  using Key = std::tuple<int, int, int>;
  std::mutex mu_;
  std::map<Key, fftw_plan> plans_;
};

}  // namespace

ComplexField fft(const ComplexField& f) {
  ComplexField out(f.grid());
  ComplexField in = f;  // FFTW may scribble on input for some plans; copy
  PlanCache::instance().execute(f.grid(), FFTW_FORWARD, in.data(), out.data());
  const double inv = 1.0 / static_cast<double>(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
  return out;
}

ComplexField fft(const ScalarField& f) { return fft(to_complex(f)); }

ComplexField ifft(const ComplexField& spec) {
  ComplexField out(spec.grid());
  ComplexField in = spec;
  PlanCache::instance().execute(spec.grid(), FFTW_BACKWARD, in.data(), out.data());
  return out;
}

ScalarField ifft_real(const ComplexField& spec) { return ifft(spec).real(); }

int signed_mode(int i, int N) {
  if (2 * i == N) return 0;  // Nyquist
  return i <= N / 2 ? i : i - N;
}

namespace {

// Applies a per-axis diagonal symbol along `axis` to an amplitude spectrum.
template <typename SymbolFn>
void apply_symbol(ComplexField& spec, int axis, SymbolFn symbol) {
  const TorusGrid& g = spec.grid();
  const int d = g.dims(), N = g.N;
  std::size_t stride = 1;
  for (int a = d - 1; a > axis; --a) stride *= static_cast<std::size_t>(N);
  const std::size_t block = stride * static_cast<std::size_t>(N);
  if (N > 64) throw std::invalid_argument("spectral: N > 64 unsupported");
  std::array<Complex, 64> sym;
  for (int i = 0; i < N; ++i) sym[static_cast<std::size_t>(i)] = symbol(signed_mode(i, N));
  for (std::size_t base = 0; base < spec.size(); base += block)
    for (int i = 0; i < N; ++i) {
      const Complex s = sym[static_cast<std::size_t>(i)];
      Complex* p = spec.data() + base + static_cast<std::size_t>(i) * stride;
      for (std::size_t j = 0; j < stride; ++j) p[j] *= s;
    }
}

ComplexField derivative_spec(const ComplexField& f, int axis) {
  ComplexField spec = fft(f);
  apply_symbol(spec, axis, [](int k) { return Complex(0.0, kTwoPi * k); });
  return spec;
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
  return ifft_real(derivative_spec(to_complex(f), axis));
}

ComplexField derivative(const ComplexField& f, int axis) {
  return ifft(derivative_spec(f, axis));
}

namespace {
ComplexField dz_impl(const ComplexField& f, int p, bool bar) {
  ComplexField spec = fft(f);
  const double sgn = bar ? 1.0 : -1.0;
  // 1/2 (d_{2p} -+ i d_{2p+1}) with 0-based axes
  ComplexField sa = spec;
  apply_symbol(sa, 2 * p, [](int k) { return Complex(0.0, kTwoPi * k) * 0.5; });
  apply_symbol(spec, 2 * p + 1,
               [sgn](int k) { return Complex(0.0, kTwoPi * k) * Complex(0.0, sgn * 0.5); });
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] += sa[i];
  return ifft(spec);
}
}  // namespace

ComplexField dz(const ComplexField& f, int p) { return dz_impl(f, p, false); }
ComplexField dzbar(const ComplexField& f, int p) { return dz_impl(f, p, true); }
ComplexField dz(const ScalarField& f, int p) { return dz_impl(to_complex(f), p, false); }
ComplexField dzbar(const ScalarField& f, int p) { return dz_impl(to_complex(f), p, true); }

ComplexField hessian_pq(const ScalarField& f, int p, int q) {
  ComplexField spec = fft(f);
  // d/dz^p then d/dzbar^q as one spectral pass
  ComplexField t1 = spec, t2 = spec, t3 = spec;
  // dz^p dzbar^q = 1/4 (d_a - i d_b)(d_c + i d_d), a=2p, b=2p+1, c=2q, d=2q+1
  auto D = [](ComplexField& s, int axis, Complex factor) {
    apply_symbol(s, axis, [factor](int k) { return Complex(0.0, kTwoPi * k) * factor; });
  };
  // term: d_a d_c
  D(spec, 2 * p, Complex(0.25, 0.0));
  D(spec, 2 * q, Complex(1.0, 0.0));
  // term: i d_a d_d
  D(t1, 2 * p, Complex(0.25, 0.0));
  D(t1, 2 * q + 1, Complex(0.0, 1.0));
  // term: -i d_b d_c
  D(t2, 2 * p + 1, Complex(0.0, -0.25));
  D(t2, 2 * q, Complex(1.0, 0.0));
  // term: d_b d_d
  D(t3, 2 * p + 1, Complex(0.25, 0.0));
  D(t3, 2 * q + 1, Complex(1.0, 0.0));
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] += t1[i] + t2[i] + t3[i];
  return ifft(spec);
}

ScalarField dealias(const ScalarField& f) {
  ComplexField spec = fft(f);
  const int N = f.grid().N;
  const int kmax = N / 3;
  for (int a = 0; a < f.grid().dims(); ++a)
    apply_symbol(spec, a, [kmax](int k) { return std::abs(k) > kmax ? 0.0 : 1.0; });
  return ifft_real(spec);
}

TrigInterpolator::TrigInterpolator(const ScalarField& f, double rel_threshold)
    : grid_(f.grid()), dims_(f.grid().dims()) {
  ComplexField spec = fft(f);
  double cmax = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) cmax = std::max(cmax, std::abs(spec[i]));
  const double cutoff = rel_threshold * cmax;
  const int N = grid_.N;
  // Nyquist keeps +N/2 here; the final real part makes it act as the cosine
  // interpolant (its spectrum coefficient is real for real samples).
  auto interp_mode = [N](int i) { return i <= N / 2 ? i : i - N; };
  for (std::size_t flat = 0; flat < spec.size(); ++flat) {
    if (std::abs(spec[flat]) > cutoff) {
      std::size_t rem = flat;
      std::array<int, 8> kk{};
      for (int a = dims_ - 1; a >= 0; --a) {
        kk[static_cast<std::size_t>(a)] = interp_mode(static_cast<int>(rem % N));
        rem /= N;
      }
      for (int a = 0; a < dims_; ++a) ks_.push_back(kk[static_cast<std::size_t>(a)]);
      cs_.push_back(spec[flat]);
    }
  }
}

namespace {
// phases[a][k + N/2] = exp(2 pi i k x_a)
void phase_tables(const TorusGrid& g, std::span<const double> x,
                  std::array<std::vector<Complex>, 8>& phases) {
  const int K = g.N / 2;
  for (int a = 0; a < g.dims(); ++a) {
    auto& row = phases[static_cast<std::size_t>(a)];
    row.assign(static_cast<std::size_t>(2 * K + 1), Complex(1.0, 0.0));
    const Complex w(std::cos(kTwoPi * x[static_cast<std::size_t>(a)]),
                    std::sin(kTwoPi * x[static_cast<std::size_t>(a)]));
    for (int k = 1; k <= K; ++k) {
      row[static_cast<std::size_t>(K + k)] = row[static_cast<std::size_t>(K + k - 1)] * w;
      row[static_cast<std::size_t>(K - k)] = std::conj(row[static_cast<std::size_t>(K + k)]);
    }
  }
}
}  // namespace

double TrigInterpolator::operator()(std::span<const double> x) const {
  std::array<std::vector<Complex>, 8> phases;
  phase_tables(grid_, x, phases);
  const int K = grid_.N / 2;
  Complex acc = 0;
  const int d = dims_;
  for (std::size_t m = 0; m < cs_.size(); ++m) {
    Complex ph = phases[0][static_cast<std::size_t>(K + ks_[m * d])];
    for (int a = 1; a < d; ++a)
      ph *= phases[static_cast<std::size_t>(a)][static_cast<std::size_t>(K + ks_[m * d + a])];
    acc += cs_[m] * ph;
  }
  return acc.real();
}

InterpBatch::InterpBatch(std::vector<const TrigInterpolator*> comps)
    : comps_(std::move(comps)) {
  if (comps_.empty()) throw std::invalid_argument("InterpBatch: empty");
  grid_ = comps_[0]->grid();
  dims_ = grid_.dims();
  for (const auto* c : comps_)
    if (!(c->grid() == grid_)) throw std::invalid_argument("InterpBatch: mixed grids");
}

void InterpBatch::eval(std::span<const double> x, std::span<double> out) const {
  std::array<std::vector<Complex>, 8> phases;
  phase_tables(grid_, x, phases);
  const int K = grid_.N / 2;
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const TrigInterpolator& t = *comps_[c];
    Complex acc = 0;
    const int d = dims_;
    for (std::size_t m = 0; m < t.cs_.size(); ++m) {
      Complex ph = phases[0][static_cast<std::size_t>(K + t.ks_[m * d])];
      for (int a = 1; a < d; ++a)
        ph *= phases[static_cast<std::size_t>(a)][static_cast<std::size_t>(K + t.ks_[m * d + a])];
      acc += t.cs_[m] * ph;
    }
    out[c] = acc.real();
  }
}

}  // namespace g2flow::spectral
