#pragma once

// Minimal dense matrix helpers for the steady-state Newton solver: row-major
// storage, LU factorization with partial pivoting, and a rough 1-norm
// condition estimate via random-probe solves.

#include <cstddef>
#include <vector>

namespace dyadic {

struct DenseMatrix {
    size_t rows = 0, cols = 0;
    std::vector<double> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
    double operator()(size_t i, size_t j) const { return data[i * cols + j]; }
};

struct LuFactors {
    DenseMatrix lu;
    std::vector<int> perm;
    bool singular = false;
};

LuFactors lu_factor(DenseMatrix m);
// Solves (LU) x = b in place.
std::vector<double> lu_solve(const LuFactors& f, std::vector<double> b);

double one_norm(const DenseMatrix& m);
// Rough kappa_1(A) from ||A||_1 and probe solves for ||A^{-1}||_1.
double condition_estimate(const DenseMatrix& a, const LuFactors& f);

}  // namespace dyadic
