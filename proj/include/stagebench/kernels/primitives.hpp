#pragma once

#include "stagebench/kernels/kernel_spec.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

namespace stagebench::kernels::prim {

// c[n x n] = a[n x m] * b[m x n], row-major, naive i-k-j loops.
void matmul_simple(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t n, std::size_t m);

// c = alpha * a[n x m] * b[m x n] + beta * c, cache-blocked.
void gemm(double alpha, std::span<const double> a, std::span<const double> b, double beta,
          std::span<double> c, std::size_t n, std::size_t m);

bool is_power_of_two(std::size_t n) noexcept;

// In-place iterative radix-2 FFT. The inverse includes the 1/n scaling.
// Throws Error(invalid_argument) unless the size is a power of two.
void fft(std::span<std::complex<double>> data, bool inverse = false);

// y <- a * x + y
void axpy(double a, std::span<const double> x, std::span<double> y);

// x <- sin(x) * x
void inplace_compute(std::span<double> x);

// Uniform [0,1) doubles.
void generate_random(std::span<double> out, Rng &rng);

// out[idx[i]] += vals[i]
void scatter_add(std::span<double> out, std::span<const std::uint32_t> idx,
                 std::span<const double> vals);

} // namespace stagebench::kernels::prim
