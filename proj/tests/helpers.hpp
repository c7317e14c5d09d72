#pragma once

// Shared generators for the test suites: seeded random matrices, stable
// systems, and W-orthonormal bases.

#include <Eigen/Dense>

#include "sprom/lti.hpp"
#include "sprom/rng.hpp"

namespace sprom::testing {

inline Mat random_complex(int rows, int cols, Philox& rng) {
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.next_cgaussian();
    return m;
}

inline Vec random_cvec(int n, Philox& rng) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_cgaussian();
    return v;
}

inline RealVec random_positive(int n, Philox& rng, double lo = 0.2, double hi = 3.0) {
    RealVec v(n);
    for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.next_double();
    return v;
}

/// Random dense A with spectrum shifted into the left half-plane.
inline Mat random_stable_matrix(int n, Philox& rng, double margin = 0.3) {
    Mat a = random_complex(n, n, rng);
    Eigen::ComplexEigenSolver<Mat> eig(a, false);
    double shift = eig.eigenvalues().real().maxCoeff() + margin;
    a.diagonal().array() -= shift;
    return a;
}

inline LtiSystem random_stable_system(int nx, int nf, Philox& rng,
                                      double margin = 0.3) {
    Mat a = random_stable_matrix(nx, rng, margin);
    Mat b = random_complex(nx, nf, rng);
    return LtiSystem(LinOp(a), LinOp(b), LinOp::identity_dense(nx));
}

/// n x m basis with Psi^* W Psi = I via weighted Gram-Schmidt (QR on W^{1/2}X).
inline Mat random_w_orthonormal(int n, int m, const Weight& w, Philox& rng) {
    Mat x = random_complex(n, m, rng);
    Eigen::HouseholderQR<Mat> qr(w.apply_sqrt(x));
    Mat q = qr.householderQ() * Mat::Identity(n, m);
    return w.apply_inv_sqrt(q);
}

}  // namespace sprom::testing
