#pragma once

#include <cstddef>
#include <vector>

namespace techprox::numeric {

/// Least-squares polynomial fit of y over abscissa x, returning monomial
/// coefficients c[0..degree] (lowest power first). The solve runs in long
/// double on a column-scaled Vandermonde so degree 10 over hundreds of
/// points stays well conditioned. Returns false when the system is rank
/// deficient (degree too high for the data).
bool polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree,
             std::vector<double>& coeffs);

double polyval(const std::vector<double>& coeffs, double x);

/// Ordinary least squares line y = intercept + slope*x.
void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& intercept,
              double& slope);

/// Median; averages the middle pair on even length. Empty input -> 0.
double median(std::vector<double> values);

double mean(const std::vector<double>& values);

/// Eigendecomposition of a symmetric n x n matrix (row-major) by cyclic
/// Jacobi rotations. Eigenvalues sorted descending, columns of `vectors`
/// are the matching eigenvectors.
void jacobi_eigen_symmetric(std::vector<double> matrix, std::size_t n,
                            std::vector<double>& values, std::vector<double>& vectors);

/// Leading eigenvector of a symmetric matrix by power iteration from a
/// caller-supplied start (deterministic). Returns the Rayleigh quotient.
double power_iteration(const std::vector<double>& matrix, std::size_t n,
                       std::vector<double>& vec, int max_iters = 300, double tol = 1e-12);

/// General linear least squares min ||A c - y|| via Householder QR in long
/// double. A is row-major m x n with m >= n. Returns false on rank deficiency.
bool least_squares(const std::vector<double>& a, std::size_t rows, std::size_t cols,
                   const std::vector<double>& y, std::vector<double>& coeffs);

}  // namespace techprox::numeric
