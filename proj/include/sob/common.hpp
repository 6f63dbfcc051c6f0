#ifndef SOB_COMMON_HPP
#define SOB_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sob {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid or inconsistent user input (bad shapes, non-histograms, malformed files).
struct InputError : std::invalid_argument {
    explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure (rank deficiency, singular systems).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double spectral_norm(const Matrix& A) {
    if (A.size() == 0) return 0.0;
    return A.jacobiSvd().singularValues()(0);
}

inline bool is_orthogonal(const Matrix& Q, double tol = 1e-10) {
    if (Q.rows() != Q.cols()) return false;
    const Eigen::Index n = Q.rows();
    return (Q.transpose() * Q - Matrix::Identity(n, n)).norm() <= tol * std::max<double>(1.0, std::sqrt(double(n)));
}

inline void require_orthogonal(const Matrix& Q, const char* what) {
    if (!is_orthogonal(Q))
        throw InputError(std::string(what) + ": matrix is not orthogonal");
}

/// Nearest orthogonal matrix in Frobenius norm (polar factor).
inline Matrix polar_orthogonal(const Matrix& Q) {
    Eigen::JacobiSVD<Matrix> svd(Q, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace sob

#endif
