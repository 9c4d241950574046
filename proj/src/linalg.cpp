#include "dichoteq/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "dichoteq/errors.hpp"

namespace dichoteq {

Matrix Matrix::identity(int n) {
    Matrix I(n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

Matrix Matrix::diagonal(const Vec& d) {
    Matrix D(static_cast<int>(d.size()));
    for (int i = 0; i < D.size(); ++i) D(i, i) = d[static_cast<size_t>(i)];
    return D;
}

Matrix operator*(const Matrix& A, const Matrix& B) {
    const int n = A.size();
    Matrix C(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

Matrix operator+(const Matrix& A, const Matrix& B) {
    Matrix C = A;
    for (size_t i = 0; i < C.data().size(); ++i) C.data()[i] += B.data()[i];
    return C;
}

Matrix operator-(const Matrix& A, const Matrix& B) {
    Matrix C = A;
    for (size_t i = 0; i < C.data().size(); ++i) C.data()[i] -= B.data()[i];
    return C;
}

Matrix operator*(double c, const Matrix& A) {
    Matrix C = A;
    for (double& v : C.data()) v *= c;
    return C;
}

Vec operator*(const Matrix& A, const Vec& x) {
    const int n = A.size();
    Vec y(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += A(i, j) * x[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = s;
    }
    return y;
}

double inf_norm(const Matrix& A) {
    double best = 0.0;
    for (int i = 0; i < A.size(); ++i) {
        double row = 0.0;
        for (int j = 0; j < A.size(); ++j) row += std::fabs(A(i, j));
        if (row > best) best = row;
    }
    return best;
}

double inf_norm(const Vec& x) {
    double best = 0.0;
    for (double v : x) best = std::max(best, std::fabs(v));
    return best;
}

Vec add(const Vec& x, const Vec& y) {
    Vec z = x;
    for (size_t i = 0; i < z.size(); ++i) z[i] += y[i];
    return z;
}

Vec sub(const Vec& x, const Vec& y) {
    Vec z = x;
    for (size_t i = 0; i < z.size(); ++i) z[i] -= y[i];
    return z;
}

Vec scale(double c, const Vec& x) {
    Vec z = x;
    for (double& v : z) v *= c;
    return z;
}

double dist_inf(const Vec& x, const Vec& y) {
    double best = 0.0;
    for (size_t i = 0; i < x.size(); ++i) best = std::max(best, std::fabs(x[i] - y[i]));
    return best;
}

InverseResult invert(const Matrix& A) {
    const int n = A.size();
    Matrix work = A;
    Matrix inv = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(work(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::fabs(work(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0)
            throw SingularCoefficient("matrix is singular at pivot column " + std::to_string(col));
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(work(pivot, j), work(col, j));
                std::swap(inv(pivot, j), inv(col, j));
            }
        }
        const double d = work(col, col);
        for (int j = 0; j < n; ++j) {
            work(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = work(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                work(r, j) -= f * work(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    const double cond = inf_norm(A) * inf_norm(inv);
    return {inv, cond};
}

} // namespace dichoteq
