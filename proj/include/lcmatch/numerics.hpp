#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace lcmatch {

/// Adaptive Simpson quadrature of f over [a, b].
/// Subdivides until the panel error estimate (Richardson, |S2-S1|/15) drops
/// below the locally apportioned share of rel_tol * |integral|, or max_depth
/// is reached. Throws NumericError when a panel cannot converge.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-9, int max_depth = 40);

/// Golden-section minimum of a unimodal f on [a, b].
/// Returns the abscissa; iterates until the bracket shrinks below x_tol.
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double x_tol, int max_iterations = 200);

/// Solve the symmetric positive-definite system A x = rhs in place via
/// Cholesky. A is row-major n*n. Returns false if a pivot is not positive.
bool cholesky_solve(std::vector<double> a, std::size_t n,
                    const std::vector<double>& rhs, std::vector<double>& x);

/// Invert a symmetric positive-definite matrix (row-major n*n).
/// Returns false on a non-positive pivot.
bool cholesky_invert(std::vector<double> a, std::size_t n, std::vector<double>& inv);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// a is row-major n*n; on return eigenvalues[k] pairs with the k-th column of
/// eigenvectors (row-major n*n). Intended for small n (fit parameter counts).
void jacobi_eigen_sym(std::vector<double> a, std::size_t n,
                      std::vector<double>& eigenvalues, std::vector<double>& eigenvectors);

/// Number of worker threads: LCMATCH_THREADS when set and > 0, otherwise the
/// hardware concurrency (0 or unset means auto).
unsigned worker_threads();

/// Run fn(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Chunks are disjoint, so writes to distinct indices need no locks
/// and results cannot depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace lcmatch
