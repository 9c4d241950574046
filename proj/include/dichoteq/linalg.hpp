#pragma once

#include <vector>

namespace dichoteq {

using Vec = std::vector<double>;

/// Dense row-major square matrix. State dimensions are small (typically 1-4),
/// so everything is direct, no factorization caching.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, double fill = 0.0) : n_(n), a_(static_cast<size_t>(n) * n, fill) {}

    static Matrix identity(int n);
    static Matrix diagonal(const Vec& d);

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    const Vec& data() const { return a_; }
    Vec& data() { return a_; }

private:
    int n_ = 0;
    Vec a_;
};

Matrix operator*(const Matrix& A, const Matrix& B);
Matrix operator+(const Matrix& A, const Matrix& B);
Matrix operator-(const Matrix& A, const Matrix& B);
Matrix operator*(double c, const Matrix& A);
Vec operator*(const Matrix& A, const Vec& x);

/// Induced infinity norm: max absolute row sum.
double inf_norm(const Matrix& A);
/// Max absolute entry.
double inf_norm(const Vec& x);

Vec add(const Vec& x, const Vec& y);
Vec sub(const Vec& x, const Vec& y);
Vec scale(double c, const Vec& x);
double dist_inf(const Vec& x, const Vec& y);

struct InverseResult {
    Matrix inv;
    double cond; // ||A||_inf * ||A^-1||_inf
};

/// Gauss-Jordan with partial pivoting. Throws SingularCoefficient on a zero pivot.
InverseResult invert(const Matrix& A);

} // namespace dichoteq
