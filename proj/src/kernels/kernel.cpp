#include "stagebench/kernels/kernel.hpp"

#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/kernels/primitives.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <thread>

namespace stagebench::kernels {

struct Kernel::Buffers {
  std::vector<double> a, b, c;
  std::vector<double> pristine;
  std::vector<std::complex<double>> signal, work;
  std::vector<std::uint32_t> idx;
  std::vector<std::uint8_t> bytes;
  std::string io_path;
};

namespace {

void write_file(const std::string &path, const std::vector<std::uint8_t> &data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw_errno(Errc::io, "open " + path);
  }
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      ::close(fd);
      throw_errno(Errc::io, "write " + path);
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

void read_file(const std::string &path, std::vector<std::uint8_t> &data) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) {
    throw_errno(Errc::io, "open " + path);
  }
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::read(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      ::close(fd);
      throw_errno(Errc::io, "read " + path);
    }
    if (n == 0) {
      break;
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

} // namespace

Kernel::Kernel(KernelSpec spec, KernelContext ctx)
    : spec_(std::move(spec)), ctx_(std::move(ctx)), buf_(std::make_unique<Buffers>()) {
  validate(spec_);
  Rng init(0x5EEDu);
  std::uniform_real_distribution<double> dist(1.0, 2.0);
  auto fill = [&](std::vector<double> &v, std::size_t n) {
    v.resize(n);
    for (auto &x : v) {
      x = dist(init);
    }
  };
  const std::size_t n0 = spec_.data_size[0];
  switch (spec_.kernel) {
  case KernelKind::MatMulSimple2D:
  case KernelKind::MatMulGeneral: {
    const std::size_t m = spec_.data_size[1];
    fill(buf_->a, n0 * m);
    fill(buf_->b, m * n0);
    buf_->c.assign(n0 * n0, 0.0);
    break;
  }
  case KernelKind::FFT: {
    if (!prim::is_power_of_two(n0)) {
      throw Error(Errc::invalid_argument, "FFT size must be a power of two");
    }
    buf_->signal.resize(n0);
    for (auto &s : buf_->signal) {
      s = {dist(init), dist(init)};
    }
    buf_->work.resize(n0);
    break;
  }
  case KernelKind::AXPY:
    fill(buf_->a, n0);
    buf_->b.assign(n0, 0.0);
    break;
  case KernelKind::InplaceCompute:
    fill(buf_->pristine, n0);
    buf_->a.resize(n0);
    break;
  case KernelKind::GenerateRandomNumber:
    buf_->a.resize(n0);
    break;
  case KernelKind::ScatterAdd: {
    fill(buf_->a, n0);
    buf_->b.assign(n0, 0.0);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n0 - 1));
    buf_->idx.resize(n0);
    for (auto &i : buf_->idx) {
      i = pick(init);
    }
    break;
  }
  case KernelKind::WriteSingleRank:
  case KernelKind::WriteNonMPI:
  case KernelKind::ReadNonMPI: {
    if (ctx_.scratch_dir.empty() || !std::filesystem::is_directory(ctx_.scratch_dir)) {
      throw Error(Errc::not_initialized,
                  "I/O kernel '" + spec_.name + "' needs an existing scratch directory");
    }
    const std::string stem = spec_.name.empty() ? std::string(to_string(spec_.kernel)) : spec_.name;
    buf_->io_path =
        (ctx_.scratch_dir / (stem + ".r" + std::to_string(ctx_.rank) + ".dat")).string();
    buf_->bytes.resize(n0);
    for (std::size_t i = 0; i < n0; ++i) {
      buf_->bytes[i] = static_cast<std::uint8_t>(i * 131u + 7u);
    }
    if (spec_.kernel == KernelKind::ReadNonMPI &&
        !std::filesystem::exists(buf_->io_path)) {
      write_file(buf_->io_path, buf_->bytes);
    }
    break;
  }
  }
}

Kernel::~Kernel() = default;
Kernel::Kernel(Kernel &&) noexcept = default;
Kernel &Kernel::operator=(Kernel &&) noexcept = default;

std::uint64_t Kernel::execute_once(Rng &rng) {
  auto &b = *buf_;
  const std::size_t n0 = spec_.data_size[0];
  switch (spec_.kernel) {
  case KernelKind::MatMulSimple2D:
    prim::matmul_simple(b.a, b.b, b.c, n0, spec_.data_size[1]);
    return 0;
  case KernelKind::MatMulGeneral:
    prim::gemm(1.0, b.a, b.b, 0.5, b.c, n0, spec_.data_size[1]);
    return 0;
  case KernelKind::FFT:
    std::copy(b.signal.begin(), b.signal.end(), b.work.begin());
    prim::fft(b.work);
    return 0;
  case KernelKind::AXPY:
    prim::axpy(1e-3, b.a, b.b);
    return 0;
  case KernelKind::InplaceCompute:
    std::copy(b.pristine.begin(), b.pristine.end(), b.a.begin());
    prim::inplace_compute(b.a);
    return 0;
  case KernelKind::GenerateRandomNumber:
    prim::generate_random(b.a, rng);
    return 0;
  case KernelKind::ScatterAdd:
    prim::scatter_add(b.b, b.idx, b.a);
    return 0;
  case KernelKind::WriteSingleRank:
    if (ctx_.rank != 0) {
      return 0;
    }
    write_file(b.io_path, b.bytes);
    return b.bytes.size();
  case KernelKind::WriteNonMPI:
    write_file(b.io_path, b.bytes);
    return b.bytes.size();
  case KernelKind::ReadNonMPI:
    read_file(b.io_path, b.bytes);
    return b.bytes.size();
  }
  return 0;
}

KernelOutcome Kernel::run(Rng &rng) {
  KernelOutcome out;
  std::optional<double> run_time = spec_.run_time;
  std::optional<std::int64_t> run_count = spec_.run_count;
  if (spec_.run_time_pdf) {
    run_time = sample(*spec_.run_time_pdf, rng);
  }
  if (spec_.run_count_pdf) {
    run_count = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(sample(*spec_.run_count_pdf, rng))));
  }

  const auto start = SteadyClock::now();
  if (run_count) {
    out.resolved_run_count = *run_count;
    for (std::int64_t i = 0; i < *run_count; ++i) {
      out.bytes_touched += execute_once(rng);
    }
    out.inner_iterations = *run_count;
  } else {
    out.resolved_run_time = *run_time;
    const auto deadline = start + std::chrono::duration_cast<SteadyClock::duration>(
                                      std::chrono::duration<double>(*run_time));
    if (spec_.busy) {
      do {
        out.bytes_touched += execute_once(rng);
        ++out.inner_iterations;
      } while (SteadyClock::now() < deadline);
    } else {
      out.bytes_touched += execute_once(rng);
      out.inner_iterations = 1;
      std::this_thread::sleep_until(deadline);
    }
  }
  out.wall_duration = seconds_between(start, SteadyClock::now());
  return out;
}

KernelOutcome run_kernel(const KernelSpec &spec, Rng &rng, const KernelContext &ctx) {
  Kernel k(spec, ctx);
  return k.run(rng);
}

double calibrate_primitive(KernelKind kind, const std::vector<std::size_t> &data_size,
                           const KernelContext &ctx) {
  KernelSpec spec;
  spec.name = "calibrate";
  spec.kernel = kind;
  spec.run_count = 1;
  spec.data_size = data_size;
  Kernel k(spec, ctx);
  Rng rng(1);
  for (int i = 0; i < 3; ++i) {
    k.execute_once(rng);
  }
  std::vector<double> samples;
  for (int i = 0; i < 11; ++i) {
    const auto t0 = SteadyClock::now();
    k.execute_once(rng);
    samples.push_back(seconds_between(t0, SteadyClock::now()));
  }
  std::nth_element(samples.begin(), samples.begin() + 5, samples.end());
  return samples[5];
}

} // namespace stagebench::kernels
