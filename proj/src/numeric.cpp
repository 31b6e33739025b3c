#include "techprox/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "techprox/util.hpp"

namespace techprox::numeric {

namespace {

// Householder QR solve in long double. a is row-major m x n, consumed.
bool qr_solve(std::vector<long double>& a, std::size_t m, std::size_t n,
              std::vector<long double>& b, std::vector<long double>& out) {
    for (std::size_t k = 0; k < n; ++k) {
        long double norm = 0;
        for (std::size_t i = k; i < m; ++i) norm += a[i * n + k] * a[i * n + k];
        norm = std::sqrt(norm);
        if (norm <= 0) return false;
        long double akk = a[k * n + k];
        long double alpha = akk > 0 ? -norm : norm;
        // v = x - alpha*e_k, stored in place of column k below the diagonal
        long double vk = akk - alpha;
        long double vnorm2 = vk * vk;
        for (std::size_t i = k + 1; i < m; ++i) vnorm2 += a[i * n + k] * a[i * n + k];
        if (vnorm2 <= 0) return false;
        a[k * n + k] = vk;
        // apply H = I - 2vv^T/(v^Tv) to remaining columns and to b
        for (std::size_t j = k + 1; j < n; ++j) {
            long double dot = 0;
            for (std::size_t i = k; i < m; ++i) dot += a[i * n + k] * a[i * n + j];
            long double f = 2 * dot / vnorm2;
            for (std::size_t i = k; i < m; ++i) a[i * n + j] -= f * a[i * n + k];
        }
        long double dotb = 0;
        for (std::size_t i = k; i < m; ++i) dotb += a[i * n + k] * b[i];
        long double fb = 2 * dotb / vnorm2;
        for (std::size_t i = k; i < m; ++i) b[i] -= fb * a[i * n + k];
        a[k * n + k] = alpha;  // R diagonal
    }
    // back substitution on R
    out.assign(n, 0);
    for (std::size_t ri = n; ri-- > 0;) {
        long double s = b[ri];
        for (std::size_t j = ri + 1; j < n; ++j) s -= a[ri * n + j] * out[j];
        long double d = a[ri * n + ri];
        if (std::abs(d) < 1e-300) return false;
        out[ri] = s / d;
    }
    return true;
}

}  // namespace

bool polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree,
             std::vector<double>& coeffs) {
    const std::size_t m = x.size();
    const std::size_t n = static_cast<std::size_t>(degree) + 1;
    if (y.size() != m) throw DataError("polyfit: x/y length mismatch");
    if (m < n) return false;
    long double scale = 0;
    for (double v : x) scale = std::max<long double>(scale, std::abs((long double)v));
    if (scale <= 0) scale = 1;
    // columns are (x/scale)^j; recovered coefficients are just rescaled
    std::vector<long double> a(m * n);
    std::vector<long double> b(m);
    for (std::size_t i = 0; i < m; ++i) {
        long double u = static_cast<long double>(x[i]) / scale;
        long double p = 1;
        for (std::size_t j = 0; j < n; ++j) {
            a[i * n + j] = p;
            p *= u;
        }
        b[i] = y[i];
    }
    std::vector<long double> z;
    if (!qr_solve(a, m, n, b, z)) return false;
    coeffs.assign(n, 0.0);
    long double p = 1;
    for (std::size_t j = 0; j < n; ++j) {
        coeffs[j] = static_cast<double>(z[j] / p);
        p *= scale;
    }
    return true;
}

double polyval(const std::vector<double>& coeffs, double x) {
    long double acc = 0;
    for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * x + coeffs[j];
    return static_cast<double>(acc);
}

void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& intercept,
              double& slope) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw DataError("fit_line: bad input");
    if (n == 1) {
        intercept = y[0];
        slope = 0;
        return;
    }
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += (long double)x[i] * x[i];
        sxy += (long double)x[i] * y[i];
    }
    long double det = (long double)n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) {
        intercept = static_cast<double>(sy / n);
        slope = 0;
        return;
    }
    slope = static_cast<double>(((long double)n * sxy - sx * sy) / det);
    intercept = static_cast<double>((sy - slope * sx) / n);
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    long double s = 0;
    for (double v : values) s += v;
    return static_cast<double>(s / values.size());
}

void jacobi_eigen_symmetric(std::vector<double> a, std::size_t n, std::vector<double>& values,
                            std::vector<double>& vectors) {
    vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = vectors[k * n + p], vkq = vectors[k * n + q];
                    vectors[k * n + p] = c * vkp - s * vkq;
                    vectors[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
    // sort eigenpairs descending by eigenvalue
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
    std::vector<double> sv(n), svec(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        sv[j] = values[order[j]];
        for (std::size_t i = 0; i < n; ++i) svec[i * n + j] = vectors[i * n + order[j]];
    }
    values = std::move(sv);
    vectors = std::move(svec);
}

double power_iteration(const std::vector<double>& matrix, std::size_t n, std::vector<double>& vec,
                       int max_iters, double tol) {
    if (vec.size() != n) vec.assign(n, 1.0);
    double norm = 0;
    for (double v : vec) norm += v * v;
    if (norm <= 0) {
        vec.assign(n, 1.0);
        norm = static_cast<double>(n);
    }
    norm = std::sqrt(norm);
    for (auto& v : vec) v /= norm;
    std::vector<double> next(n);
    double lambda = 0;
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += matrix[i * n + j] * vec[j];
            next[i] = s;
        }
        double nn = 0;
        for (double v : next) nn += v * v;
        nn = std::sqrt(nn);
        if (nn <= 0) break;
        for (auto& v : next) v /= nn;
        double diff = 0;
        for (std::size_t i = 0; i < n; ++i) diff += (next[i] - vec[i]) * (next[i] - vec[i]);
        vec = next;
        lambda = nn;
        if (diff < tol * tol) break;
    }
    return lambda;
}

bool least_squares(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                   const std::vector<double>& y, std::vector<double>& coeffs) {
    if (rows < cols || a.size() != rows * cols || y.size() != rows)
        throw DataError("least_squares: bad dimensions");
    std::vector<long double> la(a.begin(), a.end());
    std::vector<long double> lb(y.begin(), y.end());
    std::vector<long double> z;
    if (!qr_solve(la, rows, cols, lb, z)) return false;
    coeffs.assign(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) coeffs[j] = static_cast<double>(z[j]);
    return true;
}

}  // namespace techprox::numeric
