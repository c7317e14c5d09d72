#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace sprom {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;
// Row-major sparse == CSR layout.
using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr Complex kI{0.0, 1.0};

/// Bad inputs: dimension mismatches, malformed configs, violated preconditions.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures: singular factorizations, non-convergence, overflow.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Run fn(i) for i in [0, n) across a small thread pool. Each index is
/// touched exactly once; results must be written to disjoint slots so the
/// outcome is schedule-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned n_threads = 0);

}  // namespace sprom
