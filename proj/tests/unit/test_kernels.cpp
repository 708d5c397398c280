#include "stagebench/kernels/kernel.hpp"
#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/kernels/primitives.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace sk = stagebench::kernels;
using stagebench::Error;
using stagebench::test::TempDir;

namespace {

sk::KernelSpec timed(sk::KernelKind kind, std::vector<std::size_t> dims, double t) {
  sk::KernelSpec s;
  s.name = "k";
  s.kernel = kind;
  s.data_size = std::move(dims);
  s.run_time = t;
  return s;
}

} // namespace

TEST(Primitives, MatmulAgainstTripleLoop) {
  const std::size_t n = 7, m = 5;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> a(n * m), b(m * n), c(n * n), g(n * n, 1.0);
  for (auto &x : a) x = u(rng);
  for (auto &x : b) x = u(rng);
  sk::prim::matmul_simple(a, b, c, n, m);
  sk::prim::gemm(2.0, a, b, 0.5, g, n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double ref = 0;
      for (std::size_t k = 0; k < m; ++k) ref += a[i * m + k] * b[k * n + j];
      EXPECT_NEAR(c[i * n + j], ref, 1e-12);
      EXPECT_NEAR(g[i * n + j], 2.0 * ref + 0.5, 1e-12);
    }
  }
}

TEST(Primitives, GemmBlockedMatchesSimpleOnLargerSizes) {
  const std::size_t n = 130, m = 70;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> a(n * m), b(m * n), c(n * n), g(n * n, 0.0);
  for (auto &x : a) x = u(rng);
  for (auto &x : b) x = u(rng);
  sk::prim::matmul_simple(a, b, c, n, m);
  sk::prim::gemm(1.0, a, b, 0.0, g, n, m);
  for (std::size_t i = 0; i < n * n; ++i) {
    ASSERT_NEAR(c[i], g[i], 1e-10);
  }
}

TEST(Primitives, FftRoundTrip) {
  for (const std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{64}, std::size_t{4096}}) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::complex<double>> x(n);
    for (auto &v : x) v = {u(rng), u(rng)};
    auto y = x;
    sk::prim::fft(y);
    sk::prim::fft(y, true);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(y[i] - x[i]));
    EXPECT_LE(err, 1e-9) << n;
  }
}

TEST(Primitives, FftMatchesNaiveDft) {
  const std::size_t n = 16;
  std::vector<std::complex<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = {std::cos(0.3 * i), std::sin(1.7 * i)};
  auto y = x;
  sk::prim::fft(y);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> ref = 0;
    for (std::size_t t = 0; t < n; ++t) {
      ref += x[t] * std::polar(1.0, -2.0 * M_PI * double(k * t) / double(n));
    }
    EXPECT_NEAR(std::abs(y[k] - ref), 0.0, 1e-9);
  }
}

TEST(Primitives, FftRejectsNonPowerOfTwo) {
  std::vector<std::complex<double>> x(12);
  EXPECT_THROW(sk::prim::fft(x), Error);
}

TEST(Primitives, AxpyInplaceScatter) {
  std::vector<double> x{1, 2, 3}, y{10, 20, 30};
  sk::prim::axpy(2.0, x, y);
  EXPECT_EQ(y, (std::vector<double>{12, 24, 36}));
  std::vector<double> z{0.5};
  sk::prim::inplace_compute(z);
  EXPECT_DOUBLE_EQ(z[0], std::sin(0.5) * 0.5);
  std::vector<double> out(4, 0.0);
  const std::vector<std::uint32_t> idx{1, 3, 1};
  const std::vector<double> vals{1.0, 2.0, 3.0};
  sk::prim::scatter_add(out, idx, vals);
  EXPECT_EQ(out, (std::vector<double>{0, 4, 0, 2}));
}

TEST(DiscretePdf, ChiSquareThreePoints) {
  sk::DiscretePdf pdf{{0.01, 0.02, 0.05}, {0.5, 0.3, 0.2}};
  sk::Rng rng(12345);
  std::array<int, 3> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = sk::sample(pdf, rng);
    const auto it = std::find(pdf.values.begin(), pdf.values.end(), v);
    ASSERT_NE(it, pdf.values.end());
    ++counts[it - pdf.values.begin()];
  }
  double chi2 = 0;
  for (int i = 0; i < 3; ++i) {
    const double e = n * pdf.probs[i];
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  EXPECT_LT(chi2, 9.2103); // chi-square, 2 dof, alpha = 0.01
}

TEST(DiscretePdf, Validation) {
  EXPECT_THROW(sk::validate(sk::DiscretePdf{{1, 2}, {0.5}}), Error);
  EXPECT_THROW(sk::validate(sk::DiscretePdf{{1, 2}, {0.5, 0.6}}), Error);
  EXPECT_THROW(sk::validate(sk::DiscretePdf{{1}, {-1}}), Error);
  EXPECT_THROW(sk::validate(sk::DiscretePdf{{}, {}}), Error);
  EXPECT_NO_THROW(sk::validate(sk::DiscretePdf{{1, 2}, {0.25, 0.75}}));
}

TEST(KernelSpec, JsonRoundTripAndErrors) {
  const auto j = nlohmann::json::parse(R"({"name":"mm","mini_app_kernel":"MatMulSimple2D",
      "run_time":0.03147,"data_size":[256,256],"device":"xpu"})");
  const auto s = sk::kernel_spec_from_json(j);
  EXPECT_EQ(s.kernel, sk::KernelKind::MatMulSimple2D);
  EXPECT_DOUBLE_EQ(*s.run_time, 0.03147);
  EXPECT_EQ(s.data_size, (std::vector<std::size_t>{256, 256}));
  const auto back = sk::kernel_spec_from_json(sk::to_json(s));
  EXPECT_EQ(back.device, "xpu");
  EXPECT_DOUBLE_EQ(*back.run_time, 0.03147);

  EXPECT_THROW(sk::parse_kernel_kind("Bogus"), Error);
  auto bad = timed(sk::KernelKind::AXPY, {16}, 0.01);
  bad.run_count = 3;
  EXPECT_THROW(sk::validate(bad), Error);
  EXPECT_THROW(sk::validate(timed(sk::KernelKind::MatMulSimple2D, {16}, 0.01)), Error);
  EXPECT_THROW(sk::validate(timed(sk::KernelKind::AXPY, {0}, 0.01)), Error);
}

TEST(Kernel, CountModeIsExact) {
  auto s = timed(sk::KernelKind::AXPY, {1024}, 0.0);
  s.run_time.reset();
  s.run_count = 37;
  sk::Rng rng(1);
  const auto out = sk::run_kernel(s, rng);
  EXPECT_EQ(out.inner_iterations, 37);
  EXPECT_EQ(out.resolved_run_count, 37);
}

TEST(Kernel, CountPdfResolvedPerRun) {
  auto s = timed(sk::KernelKind::AXPY, {64}, 0.0);
  s.run_time.reset();
  s.run_count_pdf = sk::DiscretePdf{{2, 5}, {0.5, 0.5}};
  sk::Kernel k(s);
  sk::Rng rng(3);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 50; ++i) {
    const auto o = k.run(rng);
    EXPECT_EQ(o.inner_iterations, o.resolved_run_count);
    seen.insert(o.inner_iterations);
  }
  EXPECT_EQ(seen, (std::set<std::int64_t>{2, 5}));
}

TEST(Kernel, TimeModeBounds) {
  for (const auto &[kind, dims] :
       std::vector<std::pair<sk::KernelKind, std::vector<std::size_t>>>{
           {sk::KernelKind::MatMulSimple2D, {64, 64}},
           {sk::KernelKind::AXPY, {65536}},
           {sk::KernelKind::FFT, {4096}}}) {
    const double prim = sk::calibrate_primitive(kind, dims);
    for (const double t : {0.001, 0.03}) {
      sk::Kernel k(timed(kind, dims, t));
      sk::Rng rng(1);
      std::vector<double> d;
      for (int i = 0; i < 9; ++i) {
        d.push_back(k.run(rng).wall_duration);
      }
      std::sort(d.begin(), d.end());
      EXPECT_GE(d.front(), t) << to_string(kind);
      // Median, with slack for scheduler noise on a shared machine.
      EXPECT_LE(d[4], t + 2 * prim + 0.002) << to_string(kind) << " prim=" << prim;
    }
  }
}

TEST(Kernel, BusyConsumesCpuIdleDoesNot) {
  sk::Rng rng(1);
  auto busy = timed(sk::KernelKind::InplaceCompute, {4096}, 0.2);
  const double c0 = stagebench::process_cpu_seconds();
  sk::run_kernel(busy, rng);
  const double c1 = stagebench::process_cpu_seconds();
  auto idle = busy;
  idle.busy = false;
  const auto out = sk::run_kernel(idle, rng);
  const double c2 = stagebench::process_cpu_seconds();
  EXPECT_GE(c1 - c0, 0.1);
  EXPECT_LE(c2 - c1, 0.05);
  EXPECT_GE(out.wall_duration, 0.2);
}

TEST(Kernel, IoKernelsNeedScratchAndMoveBytes) {
  auto s = timed(sk::KernelKind::WriteNonMPI, {4096}, 0.0);
  s.run_time.reset();
  s.run_count = 3;
  sk::Rng rng(1);
  EXPECT_THROW(sk::run_kernel(s, rng), Error);
  TempDir dir("io");
  const auto out = sk::run_kernel(s, rng, {dir.path(), 2});
  EXPECT_GT(out.bytes_touched, 0u);
  s.kernel = sk::KernelKind::ReadNonMPI;
  EXPECT_GT(sk::run_kernel(s, rng, {dir.path(), 2}).bytes_touched, 0u);
  s.kernel = sk::KernelKind::WriteSingleRank;
  EXPECT_EQ(sk::run_kernel(s, rng, {dir.path(), 1}).bytes_touched, 0u);
  EXPECT_GT(sk::run_kernel(s, rng, {dir.path(), 0}).bytes_touched, 0u);
}

TEST(Kernel, RandomAndScatterRun) {
  for (const auto kind : {sk::KernelKind::GenerateRandomNumber, sk::KernelKind::ScatterAdd,
                          sk::KernelKind::MatMulGeneral}) {
    auto s = timed(kind, sk::expected_arity(kind) == 2 ? std::vector<std::size_t>{32, 32}
                                                        : std::vector<std::size_t>{1024},
                   0.0);
    s.run_time.reset();
    s.run_count = 2;
    sk::Rng rng(1);
    EXPECT_EQ(sk::run_kernel(s, rng).inner_iterations, 2);
  }
}
