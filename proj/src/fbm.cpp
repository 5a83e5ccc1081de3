#include "fbmlab/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fftw3.h>

#include "fbmlab/rng.hpp"

namespace fbmlab {

static void check_cov_domain(double s, double t, double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("Hurst exponent must lie in (0,1)");
  if (s < 0.0 || t < 0.0) throw std::domain_error("times must be >= 0");
}

double fbm_covariance(double s, double t, double hurst) {
  check_cov_domain(s, t, hurst);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double increment_covariance(double s, double t, double s2, double t2,
                            double hurst) {
  if (!(s < t) || !(s2 < t2))
    throw std::domain_error("increment intervals must be nondegenerate");
  return fbm_covariance(t, t2, hurst) - fbm_covariance(t, s2, hurst) -
         fbm_covariance(s, t2, hurst) + fbm_covariance(s, s2, hurst);
}

namespace {

// ---- fast method: circulant embedding of fractional Gaussian noise ----

// FFTW planning is not thread safe; execution on caller buffers is.
class Fft {
public:
  static Fft& instance() {
    static Fft f;
    return f;
  }

  void forward(std::vector<std::complex<double>>& inout) {
    fftw_plan plan = plan_for(inout.size());
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(inout.data()),
                     reinterpret_cast<fftw_complex*>(inout.data()));
  }

private:
  Fft() = default;

  ~Fft() {
    for (auto& [m, plan] : plans_) fftw_destroy_plan(plan);
    fftw_cleanup();
  }

  fftw_plan plan_for(size_t m) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(m);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> buf(m);
    fftw_plan p = fftw_plan_dft_1d(
        int(m), reinterpret_cast<fftw_complex*>(buf.data()),
        reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(m, p);
    return p;
  }

  std::mutex mu_;
  std::map<size_t, fftw_plan> plans_;
};

// Eigenvalues of the minimal circulant embedding of the unit-step fGn
// autocovariance, cached per (n, H). The step scale h^{2H} factors out.
const std::vector<double>& embedding_eigenvalues(int n, double hurst) {
  static std::mutex mu;
  static std::map<std::pair<int, long long>, std::vector<double>> cache;
  const long long hkey = llround(hurst * 1e15);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n, hkey});
    if (it != cache.end()) return it->second;
  }

  const double h2 = 2.0 * hurst;
  auto gamma = [&](long k) {
    const double ak = std::abs(double(k));
    return 0.5 * (std::pow(ak + 1.0, h2) - 2.0 * std::pow(ak, h2) +
                  std::pow(std::abs(ak - 1.0), h2));
  };

  const size_t m = 2 * size_t(n);
  std::vector<std::complex<double>> c(m);
  for (size_t j = 0; j <= size_t(n); ++j) c[j] = gamma(long(j));
  for (size_t j = size_t(n) + 1; j < m; ++j) c[j] = c[m - j];
  Fft::instance().forward(c);

  std::vector<double> lam(m);
  double lam_max = 0.0;
  for (size_t j = 0; j < m; ++j) lam_max = std::max(lam_max, c[j].real());
  for (size_t j = 0; j < m; ++j) {
    double v = c[j].real();
    if (v < 0.0) {
      if (v < -1e-9 * lam_max)
        throw std::runtime_error(
            "internal error: circulant embedding not nonnegative definite");
      v = 0.0;
    }
    lam[j] = v;
  }

  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(std::make_pair(n, hkey), std::move(lam)).first->second;
}

// One coordinate of fGn increments with unit step, scaled by the caller.
void sample_fgn(int n, double hurst, const rng::CounterStream& stream,
                std::vector<double>& out) {
  const auto& lam = embedding_eigenvalues(n, hurst);
  const size_t m = lam.size();
  const double inv_m = 1.0 / double(m);

  // Hermitian-symmetric spectral amplitudes from 2n independent normals.
  std::vector<std::complex<double>> a(m);
  a[0] = std::sqrt(lam[0] * inv_m) * stream.normal(0);
  a[size_t(n)] = std::sqrt(lam[size_t(n)] * inv_m) * stream.normal(1);
  for (size_t k = 1; k < size_t(n); ++k) {
    const double s = std::sqrt(0.5 * lam[k] * inv_m);
    const double re = stream.normal(2 * k);
    const double im = stream.normal(2 * k + 1);
    a[k] = {s * re, s * im};
    a[m - k] = std::conj(a[k]);
  }
  Fft::instance().forward(a);

  out.resize(size_t(n));
  for (size_t j = 0; j < size_t(n); ++j) out[j] = a[j].real();
}

void generate_fast(const ModelParams& params, const TimeGrid& grid,
                   uint64_t seed, uint64_t path_index, Path& path) {
  const int n = grid.n;
  const double scale = std::pow(grid.step(), params.hurst);
  std::vector<double> incr;
  for (int coord = 0; coord < params.d; ++coord) {
    rng::CounterStream stream(seed, path_index, uint32_t(coord),
                              rng::StreamKind::path_coordinate);
    sample_fgn(n, params.hurst, stream, incr);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += scale * incr[size_t(k)];
      path.values[size_t(k + 1) * params.d + coord] = acc;
    }
  }
}

// ---- dense method: factorization of the grid covariance ----

void generate_dense(const ModelParams& params, const TimeGrid& grid,
                    uint64_t seed, uint64_t path_index, Path& path) {
  const int n = grid.n;
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v =
          fbm_covariance(grid.point(i + 1), grid.point(j + 1), params.hurst);
      cov(i, j) = v;
      cov(j, i) = v;
    }

  const double jitter_cap = 1e-10 * cov.trace() / n;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd shifted = cov;
    if (jitter > 0.0) shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) break;
    jitter = (jitter == 0.0) ? jitter_cap * 1e-4 : jitter * 10.0;
    if (jitter > jitter_cap)
      throw std::runtime_error(
          "covariance factorization failed beyond jitter tolerance");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  Eigen::VectorXd z(n), x(n);
  for (int coord = 0; coord < params.d; ++coord) {
    rng::CounterStream stream(seed, path_index, uint32_t(coord),
                              rng::StreamKind::path_coordinate);
    for (int k = 0; k < n; ++k) z(k) = stream.normal(uint64_t(k));
    x.noalias() = L * z;
    for (int k = 0; k < n; ++k)
      path.values[size_t(k + 1) * params.d + coord] = x(k);
  }
}

} // namespace

Path generate_path(const ModelParams& params, const TimeGrid& grid,
                   uint64_t seed, uint64_t path_index, GenMethod method,
                   const PathGenConfig& cfg) {
  params.validate();
  if (grid.n < 1) throw std::domain_error("grid needs at least one step");
  if (method == GenMethod::dense && grid.n > cfg.dense_cap)
    throw std::domain_error("dense method capped at n <= " +
                            std::to_string(cfg.dense_cap));

  Path path;
  path.grid = grid;
  path.d = params.d;
  path.hurst = params.hurst;
  path.seed = seed;
  path.path_index = path_index;
  path.values.assign(size_t(grid.n + 1) * params.d, 0.0);

  if (method == GenMethod::dense)
    generate_dense(params, grid, seed, path_index, path);
  else
    generate_fast(params, grid, seed, path_index, path);
  return path;
}

void Path::write_csv(const std::string& file) const {
  FILE* f = std::fopen(file.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + file);
  std::fprintf(f, "t");
  for (int c = 0; c < d; ++c) std::fprintf(f, ",x_%d", c + 1);
  std::fprintf(f, "\n");
  for (int k = 0; k <= grid.n; ++k) {
    std::fprintf(f, "%.17g", grid.point(k));
    for (int c = 0; c < d; ++c) std::fprintf(f, ",%.17g", value(k, c));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void Path::write_binary(const std::string& file) const {
  if (grid.n > 0xFFFF) throw std::domain_error("binary dump supports n <= 65535");
  if (d > 0xFF) throw std::domain_error("binary dump supports d <= 255");
  FILE* f = std::fopen(file.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + file);

  unsigned char header[32] = {0};
  std::memcpy(header, "FBMP", 4);
  header[4] = 1; // version
  header[5] = static_cast<unsigned char>(d);
  const uint16_t n16 = static_cast<uint16_t>(grid.n);
  std::memcpy(header + 6, &n16, 2);
  std::memcpy(header + 8, &hurst, 8);
  std::memcpy(header + 16, &grid.horizon, 8);
  std::memcpy(header + 24, &seed, 8);
  std::fwrite(header, 1, 32, f);

  // coordinate-major: all times of x_1, then x_2, ...
  for (int c = 0; c < d; ++c)
    for (int k = 0; k <= grid.n; ++k) {
      const double v = value(k, c);
      std::fwrite(&v, 8, 1, f);
    }
  std::fclose(f);
}

} // namespace fbmlab
