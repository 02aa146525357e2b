#include "dyadic/dense.hpp"

#include <cmath>
#include <limits>
#include <cstdint>
#include <stdexcept>

namespace dyadic {

LuFactors lu_factor(DenseMatrix m) {
    if (m.rows != m.cols) throw std::invalid_argument("lu_factor requires a square matrix");
    const size_t n = m.rows;
    LuFactors f;
    f.perm.resize(n);
    for (size_t i = 0; i < n; ++i) f.perm[i] = static_cast<int>(i);

    double max_abs = 0.0;
    for (double v : m.data) max_abs = std::max(max_abs, std::abs(v));
    const double pivot_floor = max_abs * 1e-300 + 1e-300;

    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        double best = std::abs(m(col, col));
        for (size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(m(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best <= pivot_floor) {
            f.singular = true;
            f.lu = std::move(m);
            return f;
        }
        if (piv != col) {
            for (size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
            std::swap(f.perm[piv], f.perm[col]);
        }
        const double d = m(col, col);
        for (size_t r = col + 1; r < n; ++r) {
            const double factor = m(r, col) / d;
            m(r, col) = factor;
            for (size_t j = col + 1; j < n; ++j) m(r, j) -= factor * m(col, j);
        }
    }
    f.lu = std::move(m);
    return f;
}

std::vector<double> lu_solve(const LuFactors& f, std::vector<double> b) {
    if (f.singular) throw std::runtime_error("lu_solve on a singular factorization");
    const size_t n = f.lu.rows;
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s;
    }
    for (size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * x[j];
        x[ii] = s / f.lu(ii, ii);
    }
    return x;
}

double one_norm(const DenseMatrix& m) {
    double best = 0.0;
    for (size_t j = 0; j < m.cols; ++j) {
        double col = 0.0;
        for (size_t i = 0; i < m.rows; ++i) col += std::abs(m(i, j));
        best = std::max(best, col);
    }
    return best;
}

double condition_estimate(const DenseMatrix& a, const LuFactors& f) {
    if (f.singular) return std::numeric_limits<double>::infinity();
    const size_t n = a.rows;
    // deterministic +/-1 probes; crude lower bound on ||A^{-1}||_1
    std::uint64_t rng = 0x9e3779b97f4a7c15ull;
    double inv_norm = 0.0;
    for (int probe = 0; probe < 4; ++probe) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            v[i] = (rng & 1) ? 1.0 : -1.0;
        }
        const std::vector<double> x = lu_solve(f, std::move(v));
        double x1 = 0.0;
        for (double xv : x) x1 += std::abs(xv);
        inv_norm = std::max(inv_norm, x1 / static_cast<double>(n));
    }
    return one_norm(a) * inv_norm;
}

}  // namespace dyadic
