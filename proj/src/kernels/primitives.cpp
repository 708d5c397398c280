#include "stagebench/kernels/primitives.hpp"

#include "stagebench/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace stagebench::kernels::prim {

void matmul_simple(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t n, std::size_t m) {
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n * n), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double *ci = c.data() + i * n;
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a[i * m + k];
      const double *bk = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += aik * bk[j];
      }
    }
  }
}

void gemm(double alpha, std::span<const double> a, std::span<const double> b, double beta,
          std::span<double> c, std::size_t n, std::size_t m) {
  constexpr std::size_t kBlock = 64;
  for (std::size_t i = 0; i < n * n; ++i) {
    c[i] *= beta;
  }
  for (std::size_t ii = 0; ii < n; ii += kBlock) {
    const std::size_t i_end = std::min(ii + kBlock, n);
    for (std::size_t kk = 0; kk < m; kk += kBlock) {
      const std::size_t k_end = std::min(kk + kBlock, m);
      for (std::size_t jj = 0; jj < n; jj += kBlock) {
        const std::size_t j_end = std::min(jj + kBlock, n);
        for (std::size_t i = ii; i < i_end; ++i) {
          double *ci = c.data() + i * n;
          for (std::size_t k = kk; k < k_end; ++k) {
            const double aik = alpha * a[i * m + k];
            const double *bk = b.data() + k * n;
            for (std::size_t j = jj; j < j_end; ++j) {
              ci[j] += aik * bk[j];
            }
          }
        }
      }
    }
  }
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

void fft(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw Error(Errc::invalid_argument, "FFT size must be a power of two, got " + std::to_string(n));
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      std::swap(data[i], data[j]);
    }
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < half; ++j) {
        const auto u = data[i + j];
        const auto v = data[i + j + half] * w;
        data[i + j] = u + v;
        data[i + j + half] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto &x : data) {
      x *= scale;
    }
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = a * x[i] + y[i];
  }
}

void inplace_compute(std::span<double> x) {
  for (auto &v : x) {
    v = std::sin(v) * v;
  }
}

void generate_random(std::span<double> out, Rng &rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (auto &v : out) {
    v = dist(rng);
  }
}

void scatter_add(std::span<double> out, std::span<const std::uint32_t> idx,
                 std::span<const double> vals) {
  const std::size_t n = std::min(idx.size(), vals.size());
  for (std::size_t i = 0; i < n; ++i) {
    out[idx[i]] += vals[i];
  }
}

} // namespace stagebench::kernels::prim
