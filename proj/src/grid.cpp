#include "g2flow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace g2flow {

namespace {
void check_same(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw std::invalid_argument("field grids differ");
}
}  // namespace

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  check_same(grid_, o.grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  check_same(grid_, o.grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  for (auto& x : v_) x *= s;
  return *this;
}
ScalarField& ScalarField::operator*=(const ScalarField& o) {
  check_same(grid_, o.grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] *= o.v_[i];
  return *this;
}

double ScalarField::mean() const {
  double s = 0;
  for (double x : v_) s += x;
  return s / static_cast<double>(v_.size());
}
double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::sup_abs() const {
  double m = 0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

ScalarField ComplexField::real() const {
  ScalarField f(grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) f[i] = v_[i].real();
  return f;
}
ScalarField ComplexField::imag() const {
  ScalarField f(grid_);
  for (std::size_t i = 0; i < v_.size(); ++i) f[i] = v_[i].imag();
  return f;
}
double ComplexField::sup_abs() const {
  double m = 0;
  for (const auto& x : v_) m = std::max(m, std::abs(x));
  return m;
}

ComplexField to_complex(const ScalarField& f) {
  ComplexField c(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  return c;
}

void write_snapshot(const std::string& path_stem, const FieldSnapshot& snap) {
  if (snap.data.size() != snap.grid.points() * static_cast<std::size_t>(snap.components))
    throw std::invalid_argument("write_snapshot: data size mismatch");
  nlohmann::json hdr = {{"n", snap.grid.n},
                        {"N", snap.grid.N},
                        {"field", snap.field},
                        {"time", snap.time},
                        {"components", snap.components},
                        {"layout", "row-major x1..x2n, component fastest"},
                        {"dtype", "float64-le"}};
  std::ofstream jf(path_stem + ".json");
  if (!jf) throw std::runtime_error("write_snapshot: cannot open " + path_stem + ".json");
  jf << hdr.dump(2) << "\n";
  std::ofstream bf(path_stem + ".bin", std::ios::binary);
  if (!bf) throw std::runtime_error("write_snapshot: cannot open " + path_stem + ".bin");
  bf.write(reinterpret_cast<const char*>(snap.data.data()),
           static_cast<std::streamsize>(snap.data.size() * sizeof(double)));
}

FieldSnapshot read_snapshot(const std::string& path_stem) {
  std::ifstream jf(path_stem + ".json");
  if (!jf) throw std::runtime_error("read_snapshot: cannot open " + path_stem + ".json");
  nlohmann::json hdr = nlohmann::json::parse(jf);
  FieldSnapshot snap;
  snap.grid = TorusGrid(hdr.at("n").get<int>(), hdr.at("N").get<int>());
  snap.field = hdr.at("field").get<std::string>();
  snap.time = hdr.at("time").get<double>();
  snap.components = hdr.value("components", 1);
  snap.data.resize(snap.grid.points() * static_cast<std::size_t>(snap.components));
  std::ifstream bf(path_stem + ".bin", std::ios::binary);
  if (!bf) throw std::runtime_error("read_snapshot: cannot open " + path_stem + ".bin");
  bf.read(reinterpret_cast<char*>(snap.data.data()),
          static_cast<std::streamsize>(snap.data.size() * sizeof(double)));
  if (!bf) throw std::runtime_error("read_snapshot: short read on " + path_stem + ".bin");
  return snap;
}

}  // namespace g2flow
