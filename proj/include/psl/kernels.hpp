#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace psl {

enum class ExecMode { Serial, Parallel, Auto };

/// Numeric inner loops shared by the optimizer, the grid search and batch
/// evaluation. Every reduction combines fixed-size block partials in block
/// order, so the parallel path is bitwise identical to the serial one for
/// any thread count. kernels::parallelEnabled reports whether the parallel
/// path actually forks.
namespace kernels {

inline constexpr int64_t kBlock = 2048;

bool parallelEnabled();
int resolveThreads(ExecMode mode, int64_t work);

double sum(std::span<const double> x, ExecMode mode);
double dot(std::span<const double> a, std::span<const double> b, ExecMode mode);
double maxAbs(std::span<const double> x, ExecMode mode);

/// y = alpha * x + y
void axpy(double alpha, std::span<const double> x, std::span<double> y, ExecMode mode);

/// out[i] = A.row(i) dot x for a CSR matrix.
void spmv(std::span<const int32_t> rowPtr, std::span<const int32_t> col,
          std::span<const double> val, std::span<const double> x, std::span<double> out,
          ExecMode mode);

/// Largest alpha in (0, cap] with v + alpha*dv >= (1-tau) * v componentwise
/// over positive v; the usual boundary-fraction step rule.
double stepLimit(std::span<const double> v, std::span<const double> dv, double tau, double cap,
                 ExecMode mode);

} // namespace kernels
} // namespace psl
