#include "lcmatch/numerics.hpp"
#include "lcmatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace lcmatch {

namespace {

struct SimpsonState {
    const std::function<double(double)>& f;
    double rel_tol;
    int max_depth;
    double worst_rel_error = 0.0; // largest unconverged panel error, for diagnostics
    bool converged = true;
};

double simpson(double h, double fa, double fm, double fb) {
    return (fa + 4.0 * fm + fb) * (h / 6.0);
}

double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                       double whole, double abs_tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    const double left = simpson(m - a, fa, flm, fm);
    const double right = simpson(b - m, fm, frm, fb);
    const double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= abs_tol || depth >= st.max_depth) {
        if (std::abs(err) > abs_tol) {
            st.converged = false;
            const double scale = std::max(std::abs(whole), 1e-300);
            st.worst_rel_error = std::max(st.worst_rel_error, std::abs(err) / scale);
        }
        return left + right + err;
    }
    return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * abs_tol, depth + 1) +
           simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * abs_tol, depth + 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
    if (!(b > a)) throw DomainError("adaptive_simpson: interval is empty");
    SimpsonState st{f, rel_tol, max_depth};
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(b - a, fa, fm, fb);
    // tolerance apportioned against a first-pass scale; refined panels split it
    const double scale = std::max({std::abs(whole), std::abs(fm) * (b - a), 1e-300});
    const double result = simpson_recurse(st, a, b, fa, fm, fb, whole, rel_tol * scale, 0);
    if (!st.converged) {
        throw NumericError("adaptive_simpson: panel failed to converge at max depth",
                           st.worst_rel_error);
    }
    return result;
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double x_tol, int max_iterations) {
    constexpr double inv_phi = 0.6180339887498948482;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < max_iterations && (b - a) > x_tol; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

namespace {

// Lower-triangular Cholesky factor in place; false on non-positive pivot.
bool cholesky_factor(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
    return true;
}

} // namespace

bool cholesky_solve(std::vector<double> a, std::size_t n,
                    const std::vector<double>& rhs, std::vector<double>& x) {
    if (!cholesky_factor(a, n)) return false;
    x = rhs;
    for (std::size_t i = 0; i < n; ++i) { // L y = rhs
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) { // L^T x = y
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * x[k];
        x[ii] = s / a[ii * n + ii];
    }
    return true;
}

bool cholesky_invert(std::vector<double> a, std::size_t n, std::vector<double>& inv) {
    if (!cholesky_factor(a, n)) return false;
    inv.assign(n * n, 0.0);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = col[i];
            for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * col[k];
            col[i] = s / a[i * n + i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = col[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * col[k];
            col[ii] = s / a[ii * n + ii];
        }
        for (std::size_t i = 0; i < n; ++i) inv[i * n + j] = col[i];
    }
    return true;
}

void jacobi_eigen_sym(std::vector<double> a, std::size_t n,
                      std::vector<double>& eigenvalues, std::vector<double>& eigenvectors) {
    // Cyclic Jacobi on the upper triangle; the lower triangle is never read.
    eigenvectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eigenvectors[i * n + i] = 1.0;
    auto rotate = [&](std::vector<double>& m, std::size_t i1, std::size_t j1, std::size_t i2,
                      std::size_t j2, double s, double tau) {
        const double g = m[i1 * n + j1];
        const double h = m[i2 * n + j2];
        m[i1 * n + j1] = g - s * (h + g * tau);
        m[i2 * n + j2] = h + s * (g - h * tau);
    };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off == 0.0) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double diff = a[q * n + q] - a[p * n + p];
                double t;
                if (std::abs(apq) * 1e15 < std::abs(diff)) {
                    t = apq / diff;
                } else {
                    const double theta = diff / (2.0 * apq);
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double h = t * apq;
                a[p * n + p] -= h;
                a[q * n + q] += h;
                a[p * n + q] = 0.0;
                for (std::size_t j = 0; j < p; ++j) rotate(a, j, p, j, q, s, tau);
                for (std::size_t j = p + 1; j < q; ++j) rotate(a, p, j, j, q, s, tau);
                for (std::size_t j = q + 1; j < n; ++j) rotate(a, p, j, q, j, s, tau);
                for (std::size_t j = 0; j < n; ++j) rotate(eigenvectors, j, p, j, q, s, tau);
            }
        }
    }
    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i * n + i];
}

unsigned worker_threads() {
    if (const char* env = std::getenv("LCMATCH_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(worker_threads(), std::max<std::size_t>(n, 1));
    if (workers <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace lcmatch
