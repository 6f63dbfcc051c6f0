#ifndef SOB_KERNEL_HPP
#define SOB_KERNEL_HPP

#include <cmath>
#include <utility>

#include "sob/common.hpp"

namespace sob {

constexpr double kHistogramSumTol = 1e-6;

/// A histogram is a nonnegative vector with unit l1 norm. Vectors whose sum
/// deviates from 1 by at most kHistogramSumTol are renormalized on ingestion;
/// larger deviations are rejected.
inline Vector validate_histogram(const Vector& bins) {
    if (bins.size() == 0) throw InputError("histogram: empty bin vector");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < bins.size(); ++i) {
        if (!(bins(i) >= 0.0))
            throw InputError("histogram: negative or non-finite entry at bin " + std::to_string(i));
        sum += bins(i);
    }
    if (std::abs(sum - 1.0) > kHistogramSumTol)
        throw InputError("histogram: l1 norm " + std::to_string(sum) + " deviates from 1 beyond tolerance");
    return bins / sum;
}

/// Time-ordered stream of histograms, stored column-wise (p x N).
class HistogramStream {
  public:
    HistogramStream() = default;

    static HistogramStream from_matrix(const Matrix& columns) {
        if (columns.cols() < 1) throw InputError("stream: needs at least one column");
        HistogramStream s;
        s.data_.resize(columns.rows(), columns.cols());
        for (Eigen::Index j = 0; j < columns.cols(); ++j)
            s.data_.col(j) = validate_histogram(columns.col(j));
        return s;
    }

    Eigen::Index dim() const { return data_.rows(); }
    Eigen::Index length() const { return data_.cols(); }
    const Matrix& matrix() const { return data_; }
    Vector column(Eigen::Index j) const { return data_.col(j); }

  private:
    Matrix data_;
};

enum class KernelKind { ChiSquaredExp };

struct KernelSpec {
    KernelKind kind = KernelKind::ChiSquaredExp;
};

struct GramMatrix {
    Matrix values;
    bool centered = false;
};

/// Exponential chi-squared kernel between two histograms. Bins outside the
/// union of supports contribute nothing; bins with equal nonzero entries
/// contribute exactly 0. Summation is left-to-right for reproducibility.
inline double chi2_kernel(const Vector& y1, const Vector& y2) {
    if (y1.size() != y2.size())
        throw InputError("chi2_kernel: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y1.size(); ++i) {
        const double denom = y1(i) + y2(i);
        if (denom > 0.0) {
            const double diff = y1(i) - y2(i);
            if (diff != 0.0) acc += diff * diff / denom;
        }
    }
    return std::exp(-0.5 * acc);
}

/// Matrix of kernel values between all column pairs of two streams.
inline GramMatrix gram(const HistogramStream& Y1, const HistogramStream& Y2, const KernelSpec& = {}) {
    if (Y1.dim() != Y2.dim())
        throw InputError("gram: streams have different histogram dimensions");
    GramMatrix K;
    K.values.resize(Y1.length(), Y2.length());
    for (Eigen::Index i = 0; i < Y1.length(); ++i)
        for (Eigen::Index j = 0; j < Y2.length(); ++j)
            K.values(i, j) = chi2_kernel(Y1.matrix().col(i), Y2.matrix().col(j));
    K.centered = false;
    return K;
}

/// Two-sided centering H K H with H = I - (1/N) 1 1^T.
inline GramMatrix center_gram(const GramMatrix& K) {
    if (K.values.rows() != K.values.cols())
        throw InputError("center_gram: matrix is not square");
    const Eigen::Index N = K.values.rows();
    const Matrix H = Matrix::Identity(N, N) - Matrix::Constant(N, N, 1.0 / double(N));
    GramMatrix C;
    C.values = H * K.values * H;
    C.centered = true;
    return C;
}

}  // namespace sob

#endif
