#include "psl/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "psl/error.hpp"

#ifdef PSL_HAVE_OPENMP
#include <omp.h>
#endif

namespace psl {

namespace {

constexpr double kTiny = 1e-14;

/// Sparsity pattern of Q + A'DA + diag as compressed columns with sorted
/// rows. Symmetric, both triangles stored.
struct NormalPattern {
    std::vector<int32_t> colPtr;
    std::vector<int32_t> rowIdx;

    static NormalPattern build(const ConvexProgram& p) {
        NormalPattern pat;
        pat.colPtr.assign(static_cast<size_t>(p.numVars) + 1, 0);
        std::vector<int32_t> scratch;
        std::vector<std::vector<int32_t>> cols(static_cast<size_t>(p.numVars));
        for (int32_t j = 0; j < p.numVars; ++j) {
            scratch.clear();
            scratch.push_back(j);
            for (int32_t k = p.tRowPtr[static_cast<size_t>(j)];
                 k < p.tRowPtr[static_cast<size_t>(j) + 1]; ++k) {
                int32_t row = p.tColIdx[static_cast<size_t>(k)];
                for (int32_t t = p.rowPtr[static_cast<size_t>(row)];
                     t < p.rowPtr[static_cast<size_t>(row) + 1]; ++t) {
                    scratch.push_back(p.colIdx[static_cast<size_t>(t)]);
                }
            }
            std::sort(scratch.begin(), scratch.end());
            scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
            cols[static_cast<size_t>(j)] = scratch;
            pat.colPtr[static_cast<size_t>(j) + 1] =
                pat.colPtr[static_cast<size_t>(j)] + static_cast<int32_t>(scratch.size());
        }
        pat.rowIdx.reserve(static_cast<size_t>(pat.colPtr.back()));
        for (const auto& c : cols) pat.rowIdx.insert(pat.rowIdx.end(), c.begin(), c.end());
        return pat;
    }
};

/// Fills M = Q + A' diag(rowW) A + diag(varW) into vals laid out by pat.
/// Each column is accumulated by one thread in a fixed order, so the fill
/// is bitwise reproducible for any thread count.
void fillNormalMatrix(const ConvexProgram& p, const NormalPattern& pat,
                      std::span<const double> rowW, std::span<const double> varW,
                      std::span<double> vals, ExecMode mode) {
    int threads = kernels::resolveThreads(mode, static_cast<int64_t>(p.vals.size()));
#ifdef PSL_HAVE_OPENMP
#pragma omp parallel num_threads(threads) if (threads > 1)
#endif
    {
        std::vector<double> work(static_cast<size_t>(p.numVars), 0.0);
#ifdef PSL_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
        for (int32_t j = 0; j < p.numVars; ++j) {
            for (int32_t k = p.tRowPtr[static_cast<size_t>(j)];
                 k < p.tRowPtr[static_cast<size_t>(j) + 1]; ++k) {
                int32_t row = p.tColIdx[static_cast<size_t>(k)];
                double scaled = rowW[static_cast<size_t>(row)] * p.tVals[static_cast<size_t>(k)];
                for (int32_t t = p.rowPtr[static_cast<size_t>(row)];
                     t < p.rowPtr[static_cast<size_t>(row) + 1]; ++t) {
                    work[static_cast<size_t>(p.colIdx[static_cast<size_t>(t)])] +=
                        scaled * p.vals[static_cast<size_t>(t)];
                }
            }
            work[static_cast<size_t>(j)] += varW[static_cast<size_t>(j)];
            for (int32_t k = pat.colPtr[static_cast<size_t>(j)];
                 k < pat.colPtr[static_cast<size_t>(j) + 1]; ++k) {
                int32_t i = pat.rowIdx[static_cast<size_t>(k)];
                vals[static_cast<size_t>(k)] = work[static_cast<size_t>(i)];
                work[static_cast<size_t>(i)] = 0.0;
            }
        }
    }
    (void)threads;
}

} // namespace

SolverResult solveConvex(const ConvexProgram& p, const SolverOptions& opts,
                         const std::vector<double>* warmStart) {
    const int32_t n = p.numVars;
    const int32_t m = p.numRows;
    const ExecMode mode = opts.execMode;
    SolverResult res;
    res.x.assign(static_cast<size_t>(n), 0.0);
    res.rowDual.assign(static_cast<size_t>(m), 0.0);
    if (n == 0) {
        res.converged = true;
        return res;
    }

    std::vector<double>& x = res.x;
    std::vector<double> s(static_cast<size_t>(m), 1.0), y(static_cast<size_t>(m), 1.0);
    std::vector<double> zl(static_cast<size_t>(n), 1.0), zu(static_cast<size_t>(n), 0.0);
    std::vector<uint8_t> hasUpper(static_cast<size_t>(n), 0);
    int32_t nUpper = 0;
    for (int32_t i = 0; i < n; ++i) {
        if (std::isfinite(p.upper[static_cast<size_t>(i)])) {
            hasUpper[static_cast<size_t>(i)] = 1;
            zu[static_cast<size_t>(i)] = 1.0;
            ++nUpper;
        }
    }

    auto interior = [&](int32_t i, double v) {
        double lo = p.lower[static_cast<size_t>(i)];
        double hi = p.upper[static_cast<size_t>(i)];
        double margin = hasUpper[static_cast<size_t>(i)] ? 0.05 * (hi - lo) : 0.1;
        margin = std::min(margin, 0.1);
        double vmin = lo + margin;
        double vmax = hasUpper[static_cast<size_t>(i)] ? hi - margin : kInf;
        return std::clamp(v, vmin, vmax);
    };
    for (int32_t i = 0; i < n; ++i) {
        double v = warmStart && static_cast<size_t>(i) < warmStart->size()
                       ? (*warmStart)[static_cast<size_t>(i)]
                       : (hasUpper[static_cast<size_t>(i)]
                              ? 0.5 * (p.lower[static_cast<size_t>(i)] + p.upper[static_cast<size_t>(i)])
                              : p.lower[static_cast<size_t>(i)] + 0.5);
        x[static_cast<size_t>(i)] = interior(i, v);
    }

    std::vector<double> ax(static_cast<size_t>(m), 0.0);
    kernels::spmv(p.rowPtr, p.colIdx, p.vals, x, ax, mode);
    for (int32_t r = 0; r < m; ++r) {
        s[static_cast<size_t>(r)] = std::max(0.1, p.b[static_cast<size_t>(r)] - ax[static_cast<size_t>(r)]);
    }

    NormalPattern pat = NormalPattern::build(p);
    Eigen::SparseMatrix<double> M(n, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(pat.rowIdx.size());
        for (int32_t j = 0; j < n; ++j) {
            for (int32_t k = pat.colPtr[static_cast<size_t>(j)];
                 k < pat.colPtr[static_cast<size_t>(j) + 1]; ++k) {
                trip.emplace_back(pat.rowIdx[static_cast<size_t>(k)], j, 1.0);
            }
        }
        M.setFromTriplets(trip.begin(), trip.end());
        M.makeCompressed();
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.analyzePattern(M);
    std::vector<int32_t> diagPos(static_cast<size_t>(n), 0);
    for (int32_t j = 0; j < n; ++j) {
        for (int32_t k = pat.colPtr[static_cast<size_t>(j)];
             k < pat.colPtr[static_cast<size_t>(j) + 1]; ++k) {
            if (pat.rowIdx[static_cast<size_t>(k)] == j) {
                diagPos[static_cast<size_t>(j)] = k;
            }
        }
    }

    const double bScale = 1.0 + kernels::maxAbs(p.b, mode);
    const double cScale = 1.0 + kernels::maxAbs(p.cLin, mode);

    std::vector<double> aty(static_cast<size_t>(n), 0.0);
    std::vector<double> rp(static_cast<size_t>(m), 0.0), rd(static_cast<size_t>(n), 0.0);
    std::vector<double> rowW(static_cast<size_t>(m), 0.0), varW(static_cast<size_t>(n), 0.0);
    std::vector<double> rhs(static_cast<size_t>(n), 0.0), g(static_cast<size_t>(m), 0.0);
    std::vector<double> dx(static_cast<size_t>(n), 0.0), ds(static_cast<size_t>(m), 0.0);
    std::vector<double> dy(static_cast<size_t>(m), 0.0), dzl(static_cast<size_t>(n), 0.0);
    std::vector<double> dzu(static_cast<size_t>(n), 0.0), adx(static_cast<size_t>(m), 0.0);
    std::vector<double> xl(static_cast<size_t>(n), 0.0), xu(static_cast<size_t>(n), 0.0);

    int stalls = 0;
    for (int iter = 0; iter < opts.maxIterations; ++iter) {
        kernels::spmv(p.rowPtr, p.colIdx, p.vals, x, ax, mode);
        for (int32_t r = 0; r < m; ++r) {
            rp[static_cast<size_t>(r)] =
                ax[static_cast<size_t>(r)] + s[static_cast<size_t>(r)] - p.b[static_cast<size_t>(r)];
        }
        kernels::spmv(p.tRowPtr, p.tColIdx, p.tVals, y, aty, mode);
        for (int32_t i = 0; i < n; ++i) {
            double v = p.qDiag[static_cast<size_t>(i)] * x[static_cast<size_t>(i)] +
                       p.cLin[static_cast<size_t>(i)] + aty[static_cast<size_t>(i)] -
                       zl[static_cast<size_t>(i)];
            if (hasUpper[static_cast<size_t>(i)]) v += zu[static_cast<size_t>(i)];
            rd[static_cast<size_t>(i)] = v;
        }
        for (int32_t i = 0; i < n; ++i) {
            xl[static_cast<size_t>(i)] =
                std::max(kTiny, x[static_cast<size_t>(i)] - p.lower[static_cast<size_t>(i)]);
            xu[static_cast<size_t>(i)] =
                hasUpper[static_cast<size_t>(i)]
                    ? std::max(kTiny, p.upper[static_cast<size_t>(i)] - x[static_cast<size_t>(i)])
                    : 1.0;
        }

        double comp = kernels::dot(s, y, mode) + kernels::dot(xl, zl, mode);
        if (nUpper > 0) {
            double cu = 0.0;
            for (int32_t i = 0; i < n; ++i) {
                if (hasUpper[static_cast<size_t>(i)]) {
                    cu += xu[static_cast<size_t>(i)] * zu[static_cast<size_t>(i)];
                }
            }
            comp += cu;
        }
        double mu = comp / static_cast<double>(m + n + nUpper);
        res.primalInf = kernels::maxAbs(rp, mode);
        res.dualInf = kernels::maxAbs(rd, mode);
        res.mu = mu;
        if (res.primalInf <= opts.tolerance * bScale && res.dualInf <= opts.tolerance * cScale &&
            mu <= opts.tolerance) {
            res.converged = true;
            break;
        }

        // Barrier ratios are capped so the normal matrix stays within a range
        // LDLT can factor. The capped direction is still a descent direction
        // and only differs where a constraint is pinned to its boundary.
        constexpr double kWCap = 1e10;
        double sigmu = opts.centering * mu;
        for (int32_t r = 0; r < m; ++r) {
            double sr = std::max(kTiny, s[static_cast<size_t>(r)]);
            rowW[static_cast<size_t>(r)] = std::min(kWCap, y[static_cast<size_t>(r)] / sr);
            g[static_cast<size_t>(r)] = sigmu / sr - y[static_cast<size_t>(r)] +
                                        rowW[static_cast<size_t>(r)] * rp[static_cast<size_t>(r)];
        }
        for (int32_t i = 0; i < n; ++i) {
            double w = p.qDiag[static_cast<size_t>(i)] +
                       std::min(kWCap, zl[static_cast<size_t>(i)] / xl[static_cast<size_t>(i)]);
            if (hasUpper[static_cast<size_t>(i)]) {
                w += std::min(kWCap, zu[static_cast<size_t>(i)] / xu[static_cast<size_t>(i)]);
            }
            varW[static_cast<size_t>(i)] = w;
        }
        fillNormalMatrix(p, pat, rowW, varW,
                         {M.valuePtr(), static_cast<size_t>(M.nonZeros())}, mode);
        kernels::spmv(p.tRowPtr, p.tColIdx, p.tVals, g, rhs, mode);
        for (int32_t i = 0; i < n; ++i) {
            double v = -rd[static_cast<size_t>(i)] - rhs[static_cast<size_t>(i)] +
                       (sigmu / xl[static_cast<size_t>(i)] - zl[static_cast<size_t>(i)]);
            if (hasUpper[static_cast<size_t>(i)]) {
                v -= sigmu / xu[static_cast<size_t>(i)] - zu[static_cast<size_t>(i)];
            }
            rhs[static_cast<size_t>(i)] = v;
        }

        // Retry with growing diagonal shifts, scaled to the matrix, when
        // cancellation near the boundary produces a zero pivot.
        double dscale = 0.0;
        for (int32_t j = 0; j < n; ++j) {
            dscale = std::max(dscale, std::abs(M.valuePtr()[diagPos[static_cast<size_t>(j)]]));
        }
        dscale += 1.0;
        double shift = 0.0;
        for (double rel : {0.0, 1e-12, 1e-8, 1e-4}) {
            double tryShift = rel * dscale;
            if (tryShift > 0.0) {
                double delta = tryShift - shift;
                for (int32_t j = 0; j < n; ++j) {
                    M.valuePtr()[diagPos[static_cast<size_t>(j)]] += delta;
                }
                shift = tryShift;
            }
            ldlt.factorize(M);
            if (ldlt.info() == Eigen::Success) break;
        }
        if (ldlt.info() != Eigen::Success) {
            throw SolveError("normal-equation factorization failed at iteration " +
                             std::to_string(iter));
        }
        Eigen::Map<Eigen::VectorXd> rhsMap(rhs.data(), n);
        Eigen::VectorXd sol = ldlt.solve(rhsMap);
        for (int32_t i = 0; i < n; ++i) dx[static_cast<size_t>(i)] = sol[i];

        kernels::spmv(p.rowPtr, p.colIdx, p.vals, dx, adx, mode);
        for (int32_t r = 0; r < m; ++r) {
            ds[static_cast<size_t>(r)] = -rp[static_cast<size_t>(r)] - adx[static_cast<size_t>(r)];
            dy[static_cast<size_t>(r)] = g[static_cast<size_t>(r)] +
                                         rowW[static_cast<size_t>(r)] * adx[static_cast<size_t>(r)];
        }
        for (int32_t i = 0; i < n; ++i) {
            double dl = zl[static_cast<size_t>(i)] / xl[static_cast<size_t>(i)];
            dzl[static_cast<size_t>(i)] = sigmu / xl[static_cast<size_t>(i)] -
                                          zl[static_cast<size_t>(i)] - dl * dx[static_cast<size_t>(i)];
            if (hasUpper[static_cast<size_t>(i)]) {
                double du = zu[static_cast<size_t>(i)] / xu[static_cast<size_t>(i)];
                dzu[static_cast<size_t>(i)] = sigmu / xu[static_cast<size_t>(i)] -
                                              zu[static_cast<size_t>(i)] +
                                              du * dx[static_cast<size_t>(i)];
            } else {
                dzu[static_cast<size_t>(i)] = 0.0;
            }
        }

        double tau = opts.fractionToBoundary;
        double ap = kernels::stepLimit(s, ds, tau, 1.0, mode);
        ap = std::min(ap, kernels::stepLimit(xl, dx, tau, ap, mode));
        {
            // Upper gaps shrink when dx > 0.
            std::vector<double> ndx(static_cast<size_t>(n));
            for (int32_t i = 0; i < n; ++i) {
                ndx[static_cast<size_t>(i)] =
                    hasUpper[static_cast<size_t>(i)] ? -dx[static_cast<size_t>(i)] : 0.0;
            }
            ap = std::min(ap, kernels::stepLimit(xu, ndx, tau, ap, mode));
        }
        double ad = kernels::stepLimit(y, dy, tau, 1.0, mode);
        ad = std::min(ad, kernels::stepLimit(zl, dzl, tau, ad, mode));
        ad = std::min(ad, kernels::stepLimit(zu, dzu, tau, ad, mode));

        kernels::axpy(ap, dx, x, mode);
        kernels::axpy(ap, ds, s, mode);
        kernels::axpy(ad, dy, y, mode);
        kernels::axpy(ad, dzl, zl, mode);
        if (nUpper > 0) kernels::axpy(ad, dzu, zu, mode);
        res.iterations = iter + 1;

        if (ap < 1e-8 && ad < 1e-8) {
            if (++stalls >= 5) break;
        } else {
            stalls = 0;
        }
    }

    res.objective = p.objective(x, mode);
    res.rowDual = y;
    return res;
}

namespace {

/// Elastic program over a subset of hard rows: only the variables those rows
/// touch, their original boxes, one excess variable per row, minimize total
/// excess. varMap reports new index per original variable, -1 if absent.
ConvexProgram elasticProgram(const ConvexProgram& p, const std::vector<int32_t>& rows,
                             std::vector<int32_t>& varMap) {
    varMap.assign(static_cast<size_t>(p.numVars), -1);
    int32_t used = 0;
    for (int32_t r : rows) {
        for (int32_t t = p.rowPtr[static_cast<size_t>(r)]; t < p.rowPtr[static_cast<size_t>(r) + 1];
             ++t) {
            int32_t& slot = varMap[static_cast<size_t>(p.colIdx[static_cast<size_t>(t)])];
            if (slot < 0) slot = used++;
        }
    }
    ConvexProgram e;
    e.numVars = used + static_cast<int32_t>(rows.size());
    e.lower.assign(static_cast<size_t>(e.numVars), 0.0);
    e.upper.assign(static_cast<size_t>(e.numVars), kInf);
    e.cLin.assign(static_cast<size_t>(e.numVars), 0.0);
    e.qDiag.assign(static_cast<size_t>(e.numVars), 0.0);
    for (int32_t i = 0; i < p.numVars; ++i) {
        int32_t j = varMap[static_cast<size_t>(i)];
        if (j >= 0) {
            e.lower[static_cast<size_t>(j)] = p.lower[static_cast<size_t>(i)];
            e.upper[static_cast<size_t>(j)] = p.upper[static_cast<size_t>(i)];
        }
    }
    for (size_t k = 0; k < rows.size(); ++k) {
        e.cLin[static_cast<size_t>(used) + k] = 1.0;
    }
    e.rowPtr.push_back(0);
    for (size_t k = 0; k < rows.size(); ++k) {
        int32_t r = rows[k];
        for (int32_t t = p.rowPtr[static_cast<size_t>(r)]; t < p.rowPtr[static_cast<size_t>(r) + 1];
             ++t) {
            e.colIdx.push_back(varMap[static_cast<size_t>(p.colIdx[static_cast<size_t>(t)])]);
            e.vals.push_back(p.vals[static_cast<size_t>(t)]);
        }
        e.colIdx.push_back(used + static_cast<int32_t>(k));
        e.vals.push_back(-1.0);
        e.rowPtr.push_back(static_cast<int32_t>(e.colIdx.size()));
        e.b.push_back(p.b[static_cast<size_t>(r)]);
        e.rowHard.push_back(1);
        e.rowRule.push_back(p.rowRule[static_cast<size_t>(r)]);
    }
    e.numRows = static_cast<int32_t>(e.b.size());

    std::vector<int32_t> count(static_cast<size_t>(e.numVars), 0);
    for (int32_t c : e.colIdx) ++count[static_cast<size_t>(c)];
    e.tRowPtr.assign(static_cast<size_t>(e.numVars) + 1, 0);
    for (int32_t v = 0; v < e.numVars; ++v) {
        e.tRowPtr[static_cast<size_t>(v) + 1] =
            e.tRowPtr[static_cast<size_t>(v)] + count[static_cast<size_t>(v)];
    }
    e.tColIdx.assign(e.colIdx.size(), 0);
    e.tVals.assign(e.vals.size(), 0.0);
    std::vector<int32_t> cursor(e.tRowPtr.begin(), e.tRowPtr.end() - 1);
    for (int32_t row = 0; row < e.numRows; ++row) {
        for (int32_t k = e.rowPtr[static_cast<size_t>(row)]; k < e.rowPtr[static_cast<size_t>(row) + 1];
             ++k) {
            int32_t c = e.colIdx[static_cast<size_t>(k)];
            int32_t at = cursor[static_cast<size_t>(c)]++;
            e.tColIdx[static_cast<size_t>(at)] = row;
            e.tVals[static_cast<size_t>(at)] = e.vals[static_cast<size_t>(k)];
        }
    }
    return e;
}

double elasticOptimum(const ConvexProgram& p, const std::vector<int32_t>& rows,
                      const SolverOptions& opts, std::vector<double>* excess,
                      std::vector<double>* point) {
    std::vector<int32_t> varMap;
    ConvexProgram e = elasticProgram(p, rows, varMap);
    const int32_t used = e.numVars - static_cast<int32_t>(rows.size());
    SolverOptions o = opts;
    o.tolerance = std::min(opts.tolerance, 1e-9);
    SolverResult r = solveConvex(e, o, nullptr);
    if (excess) {
        excess->assign(rows.size(), 0.0);
        for (size_t k = 0; k < rows.size(); ++k) {
            (*excess)[k] = r.x[static_cast<size_t>(used) + k];
        }
    }
    if (point) {
        point->assign(static_cast<size_t>(p.numVars), 0.0);
        for (int32_t i = 0; i < p.numVars; ++i) {
            int32_t j = varMap[static_cast<size_t>(i)];
            double v = j >= 0 ? r.x[static_cast<size_t>(j)] : 0.0;
            v = std::max(v, p.lower[static_cast<size_t>(i)]);
            double hi = p.upper[static_cast<size_t>(i)];
            if (std::isfinite(hi)) v = std::min(v, hi);
            (*point)[static_cast<size_t>(i)] = v;
        }
    }
    return r.objective;
}

} // namespace

std::optional<InfeasibilityCertificate> checkHardFeasibility(const ConvexProgram& p,
                                                             const SolverOptions& opts,
                                                             double feasTol,
                                                             std::vector<double>* feasiblePoint) {
    std::vector<int32_t> hardRows;
    for (int32_t r = 0; r < p.numRows; ++r) {
        if (p.rowHard[static_cast<size_t>(r)]) hardRows.push_back(r);
    }
    if (hardRows.empty()) return std::nullopt;

    std::vector<double> excess;
    double total = elasticOptimum(p, hardRows, opts, &excess, feasiblePoint);
    if (total <= feasTol * (1.0 + static_cast<double>(hardRows.size()))) return std::nullopt;

    // Support of the infeasibility, then greedy deletion toward a minimal
    // conflicting set. Rows whose removal keeps the rest infeasible go.
    std::vector<int32_t> support;
    for (size_t k = 0; k < hardRows.size(); ++k) {
        if (excess[k] > feasTol) support.push_back(hardRows[k]);
    }
    if (support.empty()) support = hardRows;

    auto infeasible = [&](const std::vector<int32_t>& rows) {
        if (rows.empty()) return false;
        double v = elasticOptimum(p, rows, opts, nullptr, nullptr);
        return v > feasTol * (1.0 + static_cast<double>(rows.size()));
    };

    std::vector<int32_t> conflict = support;
    if (conflict.size() <= 24) {
        // The full system minus support rows is feasible, so checks only
        // need the support subset.
        for (size_t k = 0; k < conflict.size() && conflict.size() > 1;) {
            std::vector<int32_t> trial;
            for (size_t j = 0; j < conflict.size(); ++j) {
                if (j != k) trial.push_back(conflict[j]);
            }
            if (infeasible(trial)) {
                conflict = std::move(trial);
            } else {
                ++k;
            }
        }
    }

    InfeasibilityCertificate cert;
    cert.rows = std::move(conflict);
    cert.violation = total;
    return cert;
}

} // namespace psl
