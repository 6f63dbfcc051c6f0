#ifndef SOB_KLDS_HPP
#define SOB_KLDS_HPP

#include <string>
#include <vector>

#include "sob/common.hpp"
#include "sob/kernel.hpp"

namespace sob {

/// Kernelized linear dynamic system descriptor (A, Y, alpha, beta).
/// The feature-space observer and bias are represented implicitly by the
/// coefficients alpha and beta against the uncentered feature map of Y, so
/// alpha^T kappa(Y,Y) alpha = I_n holds with the uncentered Gram.
struct KldsDescriptor {
    Matrix A;               // n x n state transition
    HistogramStream Y;      // p x N sample matrix
    Matrix alpha;           // N x n observer coefficients
    Vector beta;            // N bias coefficients
    KernelSpec kernel;

    Eigen::Index order() const { return A.rows(); }
    Eigen::Index dim() const { return Y.dim(); }
    Eigen::Index samples() const { return Y.length(); }
};

struct EstimationOptions {
    int n = 1;                        // state dimension
    double stability_margin = 1e-4;   // enforce ||A||_2 <= 1 - margin
    double eig_floor = 1e-10;         // relative to largest Gram eigenvalue
};

struct ValidationReport {
    double orth_residual = 0.0;   // ||alpha^T K alpha - I||_F
    double spectral_norm_A = 0.0;
    bool orth_ok = false;
    bool stable_ok = false;
    bool histograms_ok = false;
    bool pass() const { return orth_ok && stable_ok && histograms_ok; }
};

namespace detail {

/// Fix eigen/singular vector signs: first nonzero coefficient positive.
inline void fix_column_signs(Matrix& V) {
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
        for (Eigen::Index i = 0; i < V.rows(); ++i) {
            if (V(i, j) != 0.0) {
                if (V(i, j) < 0.0) V.col(j) = -V.col(j);
                break;
            }
        }
    }
}

}  // namespace detail

/// KLDS parameter extraction via kernel PCA on the centered Gram followed by a
/// stability-constrained least-squares fit of the state transition.
inline KldsDescriptor estimate(const HistogramStream& Y, const EstimationOptions& opts,
                               const KernelSpec& spec = {}) {
    const Eigen::Index N = Y.length();
    const int n = opts.n;
    if (n < 1) throw InputError("estimate: state dimension must be >= 1");
    if (N < std::max(n + 1, 2))
        throw InputError("estimate: need at least max(n+1, 2) samples, got " + std::to_string(N));

    const GramMatrix Ku = gram(Y, Y, spec);
    const GramMatrix Kc = center_gram(Ku);

    Eigen::SelfAdjointEigenSolver<Matrix> evd(Kc.values);
    if (evd.info() != Eigen::Success)
        throw NumericalError("estimate: eigendecomposition failed");

    // Eigen returns ascending order; reverse to descending.
    Vector lambda = evd.eigenvalues().reverse();
    Matrix V = evd.eigenvectors().rowwise().reverse();
    detail::fix_column_signs(V);

    const double lmax = lambda(0);
    if (!(lmax > 0.0))
        throw NumericalError("estimate: centered Gram is zero (constant stream)");
    Eigen::Index usable = 0;
    while (usable < lambda.size() && lambda(usable) > opts.eig_floor * lmax) ++usable;
    if (usable < n)
        throw NumericalError("estimate: requested order " + std::to_string(n) +
                             " but only " + std::to_string(usable) + " usable Gram eigenvalues");

    const Vector ln = lambda.head(n);
    const Matrix Vn = V.leftCols(n);
    const Matrix alpha0 = Vn * ln.cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix X = ln.cwiseSqrt().asDiagonal() * Vn.transpose();  // n x N states

    const Matrix X1 = X.leftCols(N - 1);
    const Matrix X2 = X.rightCols(N - 1);
    // min_A ||X2 - A X1||_F, solved as a least-squares problem on X1^T A^T = X2^T.
    Matrix A = X1.transpose()
                   .completeOrthogonalDecomposition()
                   .solve(X2.transpose())
                   .transpose();
    const double snorm = spectral_norm(A);
    if (snorm >= 1.0 - opts.stability_margin)
        A *= (1.0 - opts.stability_margin) / snorm;

    KldsDescriptor theta;
    theta.A = A;
    theta.Y = Y;
    // Fold the centering into alpha so the orthonormality constraint holds
    // against the uncentered Gram: H K H = Kc implies (H a0)^T K (H a0) = I.
    theta.alpha = alpha0.rowwise() - alpha0.colwise().mean();
    theta.beta = Vector::Constant(N, 1.0 / double(N));
    theta.kernel = spec;
    return theta;
}

inline ValidationReport validate(const KldsDescriptor& theta) {
    ValidationReport r;
    const Eigen::Index n = theta.order();
    const GramMatrix K = gram(theta.Y, theta.Y, theta.kernel);
    r.orth_residual = (theta.alpha.transpose() * K.values * theta.alpha - Matrix::Identity(n, n)).norm();
    r.orth_ok = r.orth_residual <= 1e-8;
    r.spectral_norm_A = spectral_norm(theta.A);
    r.stable_ok = r.spectral_norm_A <= 1.0 - 1e-6;
    r.histograms_ok = true;
    for (Eigen::Index j = 0; j < theta.Y.length(); ++j) {
        const Vector y = theta.Y.column(j);
        if (y.minCoeff() < 0.0 || std::abs(y.sum() - 1.0) > kHistogramSumTol) {
            r.histograms_ok = false;
            break;
        }
    }
    return r;
}

/// Orthogonal change of state-space basis: Q . Theta = (Q^T A Q, Y, alpha Q, beta).
inline KldsDescriptor transform(const KldsDescriptor& theta, const Matrix& Q) {
    if (Q.rows() != theta.order() || Q.cols() != theta.order())
        throw InputError("transform: Q has wrong shape");
    require_orthogonal(Q, "transform");
    KldsDescriptor out = theta;
    out.A = Q.transpose() * theta.A * Q;
    out.alpha = theta.alpha * Q;
    return out;
}

/// Feature-space bias inner product mu_1^T mu_2 = beta_1^T kappa(Y1,Y2) beta_2.
inline double mu_inner(const KldsDescriptor& t1, const KldsDescriptor& t2) {
    if (t1.dim() != t2.dim())
        throw InputError("mu_inner: histogram dimension mismatch");
    const GramMatrix K = gram(t1.Y, t2.Y, t1.kernel);
    return t1.beta.dot(K.values * t2.beta);
}

}  // namespace sob

#endif
