#pragma once

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <variant>

#include "sprom/common.hpp"

namespace sprom {

/// Uniform frequency grid of a length-T window: omega_k = 2 pi k / T,
/// k = 0..n_omega-1, so e^{i omega_k n_omega dt} = 1 for every k.
struct FrequencyGrid {
    int n_omega = 0;
    double dt = 0.0;

    double T() const { return n_omega * dt; }
    double omega(int k) const { return 2.0 * kPi * k / T(); }
    /// Aliased (signed) frequency: indices above n_omega/2 map to negatives.
    double omega_signed(int k) const {
        int s = (k > n_omega / 2) ? k - n_omega : k;
        return 2.0 * kPi * s / T();
    }
    /// e^{i omega_k t} for t = j dt, evaluated from the exact rational phase.
    Complex unit_phase(int k, int j) const {
        double frac = static_cast<double>(static_cast<long long>(k) * j % n_omega) /
                      n_omega;
        return std::polar(1.0, 2.0 * kPi * frac);
    }
    bool operator==(const FrequencyGrid&) const = default;
};

/// Hermitian positive-definite inner-product weight. Stored diagonally in
/// all shipped benchmarks; a general Hermitian matrix is accepted and
/// handled through its eigendecomposition.
class Weight {
public:
    Weight() = default;
    static Weight identity(int n) { return Weight(RealVec(RealVec::Ones(n))); }
    explicit Weight(RealVec diag);
    explicit Weight(const Mat& dense_hermitian);

    int size() const { return n_; }
    bool is_diagonal() const { return diagonal_; }
    const RealVec& diag() const { return diag_; }
    const RealVec& sqrt_diag() const { return sqrt_diag_; }

    /// y^* W x
    Complex inner(const Vec& x, const Vec& y) const;
    double squared_norm(const Vec& x) const;

    Mat apply(const Mat& x) const;           // W x
    Mat apply_sqrt(const Mat& x) const;      // W^{1/2} x
    Mat apply_inv_sqrt(const Mat& x) const;  // W^{-1/2} x

private:
    int n_ = 0;
    bool diagonal_ = true;
    RealVec diag_, sqrt_diag_, inv_sqrt_diag_;
    Mat dense_, dense_sqrt_, dense_inv_sqrt_;
};

enum class StorageKind { Dense, SparseCsr };

/// Dense-or-sparse linear operator; the handful of places that need a dense
/// view (small verification paths) convert explicitly.
class LinOp {
public:
    LinOp() = default;
    LinOp(Mat m) : op_(std::move(m)) {}
    LinOp(SpMat s) : op_(std::move(s)) {}
    static LinOp identity_dense(int n) { return LinOp(Mat(Mat::Identity(n, n))); }
    static LinOp identity_sparse(int n);

    Eigen::Index rows() const;
    Eigen::Index cols() const;
    bool is_sparse() const { return std::holds_alternative<SpMat>(op_); }
    StorageKind storage() const {
        return is_sparse() ? StorageKind::SparseCsr : StorageKind::Dense;
    }

    Mat apply(const Mat& x) const;  // op * x
    Vec apply(const Vec& x) const;
    Mat apply_adjoint(const Mat& x) const;  // op^* x
    Mat dense() const;
    const SpMat& sparse() const { return std::get<SpMat>(op_); }
    bool is_identity() const;

private:
    std::variant<Mat, SpMat> op_;
};

/// The system triple of  dq/dt = A q + B f,  y = C q.
class LtiSystem {
public:
    LtiSystem() = default;
    LtiSystem(LinOp A, LinOp B, LinOp C);
    LtiSystem(const LtiSystem& other);
    LtiSystem(LtiSystem&& other) noexcept;
    LtiSystem& operator=(LtiSystem other);

    int nx() const { return nx_; }
    int nf() const { return nf_; }
    int ny() const { return ny_; }
    const LinOp& A() const { return A_; }
    const LinOp& B() const { return B_; }
    const LinOp& C() const { return C_; }
    StorageKind storage() const { return A_.storage(); }

    /// max Re(lambda(A)); computed once and cached.
    double stability_margin() const;
    bool stable() const { return stability_margin() < 0.0; }

private:
    LinOp A_, B_, C_;
    int nx_ = 0, nf_ = 0, ny_ = 0;
    mutable std::optional<double> margin_;
    mutable std::mutex margin_mutex_;
};

/// Rightmost eigenvalue real part. Dense path: full eigensolve. Sparse path:
/// shift-inverted Arnoldi for the eigenvalues nearest a small positive shift
/// (the rightmost ones for the dissipative operators shipped here).
double stability_check(const LtiSystem& sys);

/// Per-frequency solves with (i omega_k I - A); LU factorizations are
/// computed lazily and cached keyed by k. Thread-safe; two solves at the
/// same k reuse one factorization and return bit-identical results.
class ResolventCache {
public:
    ResolventCache(const LtiSystem& sys, FrequencyGrid grid);

    Mat solve(int k, const Mat& rhs) const;
    Vec solve(int k, const Vec& rhs) const;
    const FrequencyGrid& grid() const { return grid_; }

private:
    struct Factor;
    std::shared_ptr<const Factor> factor(int k) const;

    const LtiSystem* sys_;
    FrequencyGrid grid_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<int, std::shared_ptr<const Factor>> cache_;
};

/// e^{M t} by scaling-and-squaring Pade; reduced sizes only. Throws
/// NumericalError when ||M t|| exceeds the documented range (1e3).
Mat expm_action(const Mat& m, double t);

/// M^n by binary exponentiation, n >= 0.
Mat matrix_power(Mat m, long n);

/// y^* W x convenience wrapper.
Complex weighted_inner(const Weight& w, const Vec& x, const Vec& y);

}  // namespace sprom
