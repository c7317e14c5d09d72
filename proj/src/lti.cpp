#include "sprom/lti.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sprom {

// ---------------------------------------------------------------------------
// Weight

Weight::Weight(RealVec diag) : n_(static_cast<int>(diag.size())), diag_(std::move(diag)) {
    if ((diag_.array() <= 0.0).any())
        throw ValidationError("weight: diagonal entries must be strictly positive");
    sqrt_diag_ = diag_.array().sqrt();
    inv_sqrt_diag_ = sqrt_diag_.cwiseInverse();
}

Weight::Weight(const Mat& dense_hermitian) {
    n_ = static_cast<int>(dense_hermitian.rows());
    if (dense_hermitian.cols() != n_)
        throw ValidationError("weight: matrix must be square");
    if ((dense_hermitian - dense_hermitian.adjoint()).norm() >
        1e-12 * std::max(1.0, dense_hermitian.norm()))
        throw ValidationError("weight: matrix must be Hermitian");
    diagonal_ = false;
    Eigen::SelfAdjointEigenSolver<Mat> eig(dense_hermitian);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError("weight: matrix must be positive definite");
    dense_ = dense_hermitian;
    RealVec root = eig.eigenvalues().array().sqrt();
    dense_sqrt_ = eig.eigenvectors() * root.asDiagonal() *
                  eig.eigenvectors().adjoint();
    dense_inv_sqrt_ = eig.eigenvectors() * root.cwiseInverse().asDiagonal() *
                      eig.eigenvectors().adjoint();
}

Complex Weight::inner(const Vec& x, const Vec& y) const {
    if (x.size() != n_ || y.size() != n_)
        throw ValidationError("weighted inner product: dimension mismatch");
    if (diagonal_) return y.dot(diag_.array().cast<Complex>().matrix().cwiseProduct(x));
    return (y.adjoint() * dense_ * x)(0, 0);
}

double Weight::squared_norm(const Vec& x) const {
    if (diagonal_) {
        if (x.size() != n_) throw ValidationError("weighted norm: dimension mismatch");
        return (x.array().abs2() * diag_.array()).sum();
    }
    return inner(x, x).real();
}

Mat Weight::apply(const Mat& x) const {
    if (diagonal_) return diag_.cast<Complex>().asDiagonal() * x;
    return dense_ * x;
}

Mat Weight::apply_sqrt(const Mat& x) const {
    if (diagonal_) return sqrt_diag_.cast<Complex>().asDiagonal() * x;
    return dense_sqrt_ * x;
}

Mat Weight::apply_inv_sqrt(const Mat& x) const {
    if (diagonal_) return inv_sqrt_diag_.cast<Complex>().asDiagonal() * x;
    return dense_inv_sqrt_ * x;
}

Complex weighted_inner(const Weight& w, const Vec& x, const Vec& y) {
    return w.inner(x, y);
}

// ---------------------------------------------------------------------------
// LinOp

LinOp LinOp::identity_sparse(int n) {
    SpMat id(n, n);
    id.setIdentity();
    return LinOp(std::move(id));
}

Eigen::Index LinOp::rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, op_);
}

Eigen::Index LinOp::cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, op_);
}

Mat LinOp::apply(const Mat& x) const {
    return std::visit([&](const auto& m) -> Mat { return m * x; }, op_);
}

Vec LinOp::apply(const Vec& x) const {
    return std::visit([&](const auto& m) -> Vec { return m * x; }, op_);
}

Mat LinOp::apply_adjoint(const Mat& x) const {
    return std::visit([&](const auto& m) -> Mat { return m.adjoint() * x; }, op_);
}

Mat LinOp::dense() const {
    if (is_sparse()) return Mat(std::get<SpMat>(op_));
    return std::get<Mat>(op_);
}

bool LinOp::is_identity() const {
    if (rows() != cols()) return false;
    if (is_sparse()) {
        const SpMat& s = std::get<SpMat>(op_);
        if (s.nonZeros() != s.rows()) return false;
        for (int i = 0; i < s.outerSize(); ++i)
            for (SpMat::InnerIterator it(s, i); it; ++it)
                if (it.row() != it.col() || it.value() != Complex(1, 0)) return false;
        return true;
    }
    const Mat& m = std::get<Mat>(op_);
    return m == Mat::Identity(m.rows(), m.cols());
}

// ---------------------------------------------------------------------------
// LtiSystem

LtiSystem::LtiSystem(LinOp A, LinOp B, LinOp C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
    nx_ = static_cast<int>(A_.rows());
    if (A_.cols() != nx_) throw ValidationError("lti: A must be square");
    if (B_.rows() != nx_) throw ValidationError("lti: B must have nx rows");
    if (C_.cols() != nx_) throw ValidationError("lti: C must have nx columns");
    nf_ = static_cast<int>(B_.cols());
    ny_ = static_cast<int>(C_.rows());
}

LtiSystem::LtiSystem(const LtiSystem& other)
    : A_(other.A_), B_(other.B_), C_(other.C_),
      nx_(other.nx_), nf_(other.nf_), ny_(other.ny_) {
    std::lock_guard<std::mutex> lk(other.margin_mutex_);
    margin_ = other.margin_;
}

LtiSystem::LtiSystem(LtiSystem&& other) noexcept
    : A_(std::move(other.A_)), B_(std::move(other.B_)), C_(std::move(other.C_)),
      nx_(other.nx_), nf_(other.nf_), ny_(other.ny_), margin_(other.margin_) {}

LtiSystem& LtiSystem::operator=(LtiSystem other) {
    A_ = std::move(other.A_);
    B_ = std::move(other.B_);
    C_ = std::move(other.C_);
    nx_ = other.nx_;
    nf_ = other.nf_;
    ny_ = other.ny_;
    margin_ = other.margin_;
    return *this;
}

double LtiSystem::stability_margin() const {
    std::lock_guard<std::mutex> lk(margin_mutex_);
    if (!margin_) margin_ = stability_check(*this);
    return *margin_;
}

namespace {

// Explicitly restarted shift-invert Arnoldi for the eigenvalues of A nearest
// the (real) shift. Returns the mapped Ritz values with small residuals.
double sparse_rightmost(const SpMat& a, int max_outer = 25, int krylov = 60) {
    const int n = static_cast<int>(a.rows());
    krylov = std::min(krylov, n);
    // Shift slightly into the right half-plane so sigma I - A is comfortably
    // invertible for the stable operators this path serves.
    double scale = 0.0;
    for (int i = 0; i < a.outerSize(); ++i)
        for (SpMat::InnerIterator it(a, i); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    double sigma = 1e-3 * std::max(scale, 1.0);

    Eigen::SparseMatrix<Complex> shifted(n, n);
    {
        SpMat tmp = -a;
        for (int i = 0; i < n; ++i) tmp.coeffRef(i, i) += sigma;
        shifted = tmp;
    }
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw NumericalError("stability check: shifted operator factorization failed");

    Vec v = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
    double best = -std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < max_outer; ++outer) {
        Mat basis(n, krylov + 1);
        Mat h = Mat::Zero(krylov + 1, krylov);
        basis.col(0) = v / v.norm();
        int m = krylov;
        for (int j = 0; j < krylov; ++j) {
            Vec w = lu.solve(basis.col(j));
            for (int i = 0; i <= j; ++i) {
                h(i, j) = basis.col(i).dot(w);
                w -= h(i, j) * basis.col(i);
            }
            // Re-orthogonalize once; Krylov bases drift otherwise.
            for (int i = 0; i <= j; ++i) {
                Complex c = basis.col(i).dot(w);
                h(i, j) += c;
                w -= c * basis.col(i);
            }
            h(j + 1, j) = w.norm();
            if (std::abs(h(j + 1, j)) < 1e-14) {
                m = j + 1;
                break;
            }
            basis.col(j + 1) = w / h(j + 1, j);
        }
        Eigen::ComplexEigenSolver<Mat> eig(h.topLeftCorner(m, m));
        double beta = std::abs(h(m, m - 1));
        double rightmost = -std::numeric_limits<double>::infinity();
        bool converged = false;
        int best_idx = 0;
        double best_theta = 0.0;
        for (int i = 0; i < m; ++i) {
            Complex theta = eig.eigenvalues()(i);
            if (std::abs(theta) < 1e-300) continue;
            Complex lambda = sigma - 1.0 / theta;
            double resid = beta * std::abs(eig.eigenvectors()(m - 1, i)) /
                           std::abs(theta);
            if (lambda.real() > rightmost) {
                rightmost = lambda.real();
                best_idx = i;
                best_theta = std::abs(theta);
                converged = resid < 1e-8 * best_theta;
            }
        }
        (void)best_idx;
        if (converged) return rightmost;
        best = std::max(best, rightmost);
        // Restart from the dominant Ritz direction.
        int lead = 0;
        eig.eigenvalues().cwiseAbs().maxCoeff(&lead);
        v = basis.leftCols(m) * eig.eigenvectors().col(lead);
    }
    throw NumericalError("stability check: Arnoldi iteration did not converge");
}

}  // namespace

double stability_check(const LtiSystem& sys) {
    if (sys.storage() == StorageKind::Dense) {
        Eigen::ComplexEigenSolver<Mat> eig(sys.A().dense(), false);
        return eig.eigenvalues().real().maxCoeff();
    }
    return sparse_rightmost(sys.A().sparse());
}

// ---------------------------------------------------------------------------
// ResolventCache

struct ResolventCache::Factor {
    std::optional<Eigen::PartialPivLU<Mat>> dense;
    std::optional<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>> sparse;
};

ResolventCache::ResolventCache(const LtiSystem& sys, FrequencyGrid grid)
    : sys_(&sys), grid_(grid) {
    if (grid_.n_omega <= 0 || grid_.dt <= 0.0)
        throw ValidationError("resolvent: invalid frequency grid");
}

std::shared_ptr<const ResolventCache::Factor> ResolventCache::factor(int k) const {
    {
        std::lock_guard<std::mutex> lk(mutex_);
        auto it = cache_.find(k);
        if (it != cache_.end()) return it->second;
    }
    const Complex shift = kI * grid_.omega(k);
    auto fac = std::make_shared<Factor>();
    if (sys_->storage() == StorageKind::Dense) {
        Mat m = -sys_->A().dense();
        m.diagonal().array() += shift;
        fac->dense.emplace(m);
        // PartialPivLU does not flag singularity; test the pivots directly.
        if (fac->dense->matrixLU().diagonal().array().abs().minCoeff() == 0.0) {
            std::ostringstream msg;
            msg << "resolvent: singular factorization at frequency index " << k;
            throw NumericalError(msg.str());
        }
    } else {
        SpMat tmp = -sys_->A().sparse();
        for (int i = 0; i < tmp.rows(); ++i) tmp.coeffRef(i, i) += shift;
        Eigen::SparseMatrix<Complex> col = tmp;
        fac->sparse.emplace();
        fac->sparse->compute(col);
        if (fac->sparse->info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "resolvent: singular factorization at frequency index " << k;
            throw NumericalError(msg.str());
        }
    }
    std::lock_guard<std::mutex> lk(mutex_);
    auto [it, inserted] = cache_.emplace(k, std::move(fac));
    (void)inserted;  // a concurrent builder may have won; reuse its factor
    return it->second;
}

Mat ResolventCache::solve(int k, const Mat& rhs) const {
    if (rhs.rows() != sys_->nx())
        throw ValidationError("resolvent solve: rhs dimension mismatch");
    auto fac = factor(k);
    if (fac->dense) return fac->dense->solve(rhs);
    return fac->sparse->solve(rhs);
}

Vec ResolventCache::solve(int k, const Vec& rhs) const {
    Mat m = solve(k, Mat(rhs));
    return m.col(0);
}

// ---------------------------------------------------------------------------
// Matrix exponential helpers

Mat expm_action(const Mat& m, double t) {
    if (m.rows() != m.cols()) throw ValidationError("expm: matrix must be square");
    Mat scaled = m * t;
    double norm = scaled.norm();
    if (!std::isfinite(norm) || norm > 1e3)
        throw NumericalError("expm: ||M t|| outside the supported range (<= 1e3)");
    return scaled.exp();
}

Mat matrix_power(Mat m, long n) {
    if (m.rows() != m.cols()) throw ValidationError("matrix power: square input required");
    if (n < 0) throw ValidationError("matrix power: nonnegative exponent required");
    Mat result = Mat::Identity(m.rows(), m.cols());
    while (n > 0) {
        if (n & 1) result = result * m;
        n >>= 1;
        if (n) m = m * m;
    }
    return result;
}

}  // namespace sprom
