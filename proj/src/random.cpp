#include "freeconvex/random.hpp"

namespace freeconvex {

namespace {
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

Rng substream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return Rng(splitmix(seed ^ splitmix(h)));
}

double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

Matrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      double re = uniform(rng);
      double im = uniform(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

Matrix random_unitary(Eigen::Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_complex(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace freeconvex
