#include "psl/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef PSL_HAVE_OPENMP
#include <omp.h>
#endif

namespace psl::kernels {

bool parallelEnabled() {
#ifdef PSL_HAVE_OPENMP
    return true;
#else
    return false;
#endif
}

int resolveThreads(ExecMode mode, int64_t work) {
#ifdef PSL_HAVE_OPENMP
    if (mode == ExecMode::Serial) return 1;
    if (mode == ExecMode::Auto && work < 4 * kBlock) return 1;
    return std::max(1, omp_get_max_threads());
#else
    (void)mode;
    (void)work;
    return 1;
#endif
}

namespace {

int64_t blockCount(int64_t n) { return (n + kBlock - 1) / kBlock; }

/// Reduces per-block partials in block order. Both execution paths fill the
/// same partial layout, which pins the floating-point summation order.
template <class BlockFn>
std::vector<double> blockPartials(int64_t n, ExecMode mode, double init, BlockFn&& fn) {
    int64_t nb = blockCount(n);
    std::vector<double> partial(static_cast<size_t>(std::max<int64_t>(nb, 1)), init);
    int threads = resolveThreads(mode, n);
#ifdef PSL_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
    for (int64_t bidx = 0; bidx < nb; ++bidx) {
        int64_t lo = bidx * kBlock;
        int64_t hi = std::min(n, lo + kBlock);
        partial[static_cast<size_t>(bidx)] = fn(lo, hi);
    }
    (void)threads;
    return partial;
}

} // namespace

double sum(std::span<const double> x, ExecMode mode) {
    auto partial = blockPartials(static_cast<int64_t>(x.size()), mode, 0.0,
                                 [&](int64_t lo, int64_t hi) {
                                     double s = 0.0;
                                     for (int64_t i = lo; i < hi; ++i) s += x[static_cast<size_t>(i)];
                                     return s;
                                 });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double dot(std::span<const double> a, std::span<const double> b, ExecMode mode) {
    auto partial = blockPartials(static_cast<int64_t>(a.size()), mode, 0.0,
                                 [&](int64_t lo, int64_t hi) {
                                     double s = 0.0;
                                     for (int64_t i = lo; i < hi; ++i) {
                                         s += a[static_cast<size_t>(i)] * b[static_cast<size_t>(i)];
                                     }
                                     return s;
                                 });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double maxAbs(std::span<const double> x, ExecMode mode) {
    auto partial = blockPartials(static_cast<int64_t>(x.size()), mode, 0.0,
                                 [&](int64_t lo, int64_t hi) {
                                     double m = 0.0;
                                     for (int64_t i = lo; i < hi; ++i) {
                                         m = std::max(m, std::fabs(x[static_cast<size_t>(i)]));
                                     }
                                     return m;
                                 });
    double total = 0.0;
    for (double p : partial) total = std::max(total, p);
    return total;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y, ExecMode mode) {
    int64_t n = static_cast<int64_t>(x.size());
    int threads = resolveThreads(mode, n);
#ifdef PSL_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
    for (int64_t i = 0; i < n; ++i) {
        y[static_cast<size_t>(i)] += alpha * x[static_cast<size_t>(i)];
    }
    (void)threads;
}

void spmv(std::span<const int32_t> rowPtr, std::span<const int32_t> col,
          std::span<const double> val, std::span<const double> x, std::span<double> out,
          ExecMode mode) {
    int64_t rows = static_cast<int64_t>(rowPtr.size()) - 1;
    int threads = resolveThreads(mode, static_cast<int64_t>(val.size()));
#ifdef PSL_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
    for (int64_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int32_t k = rowPtr[static_cast<size_t>(r)]; k < rowPtr[static_cast<size_t>(r) + 1];
             ++k) {
            s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
        }
        out[static_cast<size_t>(r)] = s;
    }
    (void)threads;
}

double stepLimit(std::span<const double> v, std::span<const double> dv, double tau, double cap,
                 ExecMode mode) {
    auto partial = blockPartials(static_cast<int64_t>(v.size()), mode, cap,
                                 [&](int64_t lo, int64_t hi) {
                                     double a = cap;
                                     for (int64_t i = lo; i < hi; ++i) {
                                         double vi = v[static_cast<size_t>(i)];
                                         double di = dv[static_cast<size_t>(i)];
                                         if (di < 0.0 && vi > 0.0) {
                                             a = std::min(a, -tau * vi / di);
                                         }
                                     }
                                     return a;
                                 });
    double a = cap;
    for (double p : partial) a = std::min(a, p);
    return a;
}

} // namespace psl::kernels
