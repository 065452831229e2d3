#pragma once

// Iterative radix-2 complex FFT for power-of-two lengths, plus a helper that
// applies the transform along every axis of a d-dimensional cube stored in
// row-major order.
//
// Conventions (unnormalized, matching the usual discrete Fourier pair):
//   forward:  X[k] = sum_j x[j] exp(-2*pi*i*j*k/N)
//   inverse:  x[j] = sum_k X[k] exp(+2*pi*i*j*k/N)      (caller divides by N^d)
//
// Twiddle factors and the bit-reversal permutation are precomputed once per
// plan, so repeated transforms of the same length only touch the butterfly
// loops.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace shelab {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (!is_power_of_two(n)) {
      throw std::invalid_argument("FftPlan: length must be a power of two");
    }
    rev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b) {
        r |= ((i >> b) & 1u) << (log2n - 1 - b);
      }
      rev_[i] = r;
    }
    // Forward twiddles for each butterfly span: w_len^k = exp(-2 pi i k/len).
    twiddle_.resize(n / 2 > 0 ? n / 2 : 1);
    const double base = -2.0 * M_PI / static_cast<double>(n);
    for (std::size_t k = 0; k < twiddle_.size(); ++k) {
      twiddle_[k] = std::polar(1.0, base * static_cast<double>(k));
    }
  }

  std::size_t size() const { return n_; }

  // In-place transform of a contiguous array of length size().
  void forward(cplx* data) const { transform(data, false); }
  void inverse(cplx* data) const { transform(data, true); }

 private:
  void transform(cplx* a, bool inverse) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = rev_[i];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len >> 1;
      const std::size_t stride = n / len;  // index step through the twiddle table
      for (std::size_t start = 0; start < n; start += len) {
        std::size_t tw = 0;
        for (std::size_t k = 0; k < half; ++k, tw += stride) {
          cplx w = twiddle_[tw];
          if (inverse) w = std::conj(w);
          const cplx u = a[start + k];
          const cplx v = a[start + k + half] * w;
          a[start + k] = u + v;
          a[start + k + half] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<cplx> twiddle_;
};

// Applies a 1-d plan along every axis of a row-major cube with `dim` axes of
// identical extent plan.size().  For dim == 1 this is a single in-place call;
// higher axes are transformed through a gather/scatter line buffer.
class CubeFft {
 public:
  CubeFft(int dim, std::size_t n) : dim_(dim), plan_(n) {
    if (dim < 1 || dim > 3) {
      throw std::invalid_argument("CubeFft: dim must be 1, 2, or 3");
    }
    cells_ = 1;
    for (int a = 0; a < dim; ++a) cells_ *= n;
    line_.resize(n);
  }

  std::size_t cells() const { return cells_; }
  std::size_t extent() const { return plan_.size(); }
  int dim() const { return dim_; }

  void forward(cplx* data) { transform(data, false); }
  void inverse(cplx* data) { transform(data, true); }

 private:
  void transform(cplx* data, bool inverse) {
    const std::size_t n = plan_.size();
    // Axis `a` has stride n^(dim-1-a) in row-major layout.
    std::size_t stride = cells_ / n;
    for (int a = 0; a < dim_; ++a, stride /= n) {
      const std::size_t lines = cells_ / n;
      for (std::size_t l = 0; l < lines; ++l) {
        // Decompose the line index into (block, offset) around the axis.
        const std::size_t block = l / stride;
        const std::size_t offset = l % stride;
        cplx* base = data + block * stride * n + offset;
        if (stride == 1) {
          if (inverse) {
            plan_.inverse(base);
          } else {
            plan_.forward(base);
          }
        } else {
          for (std::size_t i = 0; i < n; ++i) line_[i] = base[i * stride];
          if (inverse) {
            plan_.inverse(line_.data());
          } else {
            plan_.forward(line_.data());
          }
          for (std::size_t i = 0; i < n; ++i) base[i * stride] = line_[i];
        }
      }
    }
  }

  int dim_;
  FftPlan plan_;
  std::size_t cells_;
  std::vector<cplx> line_;
};

}  // namespace shelab
