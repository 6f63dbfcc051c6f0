#ifndef SOB_FRECHET_HPP
#define SOB_FRECHET_HPP

#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "sob/align.hpp"
#include "sob/common.hpp"
#include "sob/klds.hpp"

namespace sob {

struct MeanOptions {
    Eigen::Index n_bar = 0;      // landmark count; 0 keeps the full concatenation
    int kmeans_iters = 50;
    int kmeans_restarts = 3;
    std::uint64_t seed = 0;
    double outer_tol = 1e-8;     // relative change of the mean objective g
    int max_outer = 50;
    double ridge = 1e-10;        // added to kappa(Ybar,Ybar) before inversion
};

struct FrechetResult {
    KldsDescriptor mean;
    std::vector<Matrix> aligners;
    std::vector<double> cost_trace;  // g per outer iteration
    bool converged = false;
};

/// Column concatenation Y* = [Y_1 ... Y_K], order preserved.
inline HistogramStream concat_samples(const std::vector<KldsDescriptor>& descriptors) {
    if (descriptors.empty()) throw InputError("concat_samples: empty set");
    const Eigen::Index p = descriptors.front().dim();
    Eigen::Index total = 0;
    for (const auto& t : descriptors) {
        if (t.dim() != p) throw InputError("concat_samples: histogram dimension mismatch");
        total += t.samples();
    }
    Matrix all(p, total);
    Eigen::Index at = 0;
    for (const auto& t : descriptors) {
        all.middleCols(at, t.samples()) = t.Y.matrix();
        at += t.samples();
    }
    return HistogramStream::from_matrix(all);
}

namespace detail {

inline double kmeans_sse(const Matrix& X, const Matrix& C, std::vector<Eigen::Index>& assign) {
    double sse = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = 0;
        for (Eigen::Index k = 0; k < C.cols(); ++k) {
            const double d = (X.col(j) - C.col(k)).squaredNorm();
            if (d < best) {
                best = d;
                arg = k;
            }
        }
        assign[std::size_t(j)] = arg;
        sse += best;
    }
    return sse;
}

inline Matrix kmeans_pp_seed(const Matrix& X, Eigen::Index k, std::mt19937_64& rng) {
    const Eigen::Index N = X.cols();
    Matrix C(X.rows(), k);
    std::uniform_int_distribution<Eigen::Index> uni(0, N - 1);
    C.col(0) = X.col(uni(rng));
    Vector d2(N);
    for (Eigen::Index c = 1; c < k; ++c) {
        for (Eigen::Index j = 0; j < N; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index m = 0; m < c; ++m)
                best = std::min(best, (X.col(j) - C.col(m)).squaredNorm());
            d2(j) = best;
        }
        const double total = d2.sum();
        if (total <= 0.0) {
            C.col(c) = X.col(uni(rng));
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        Eigen::Index pick = N - 1;
        for (Eigen::Index j = 0; j < N; ++j) {
            r -= d2(j);
            if (r <= 0.0) {
                pick = j;
                break;
            }
        }
        C.col(c) = X.col(pick);
    }
    return C;
}

}  // namespace detail

/// Euclidean k-means landmarks of the concatenated sample matrix, with
/// k-means++ seeding and best-of-restarts selection. Centroids are
/// renormalized to unit l1 so the landmarks remain valid histograms.
inline HistogramStream kmeans_landmarks(const HistogramStream& Ystar, Eigen::Index n_bar,
                                        std::uint64_t seed, int iters = 50, int restarts = 3) {
    const Matrix& X = Ystar.matrix();
    if (n_bar < 1 || n_bar > X.cols())
        throw InputError("kmeans_landmarks: landmark count out of range");
    std::mt19937_64 rng(seed);
    Matrix best_C;
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> assign(std::size_t(X.cols()));
    for (int r = 0; r < restarts; ++r) {
        Matrix C = detail::kmeans_pp_seed(X, n_bar, rng);
        for (int it = 0; it < iters; ++it) {
            detail::kmeans_sse(X, C, assign);
            Matrix sums = Matrix::Zero(X.rows(), n_bar);
            Vector counts = Vector::Zero(n_bar);
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
                sums.col(assign[std::size_t(j)]) += X.col(j);
                counts(assign[std::size_t(j)]) += 1.0;
            }
            bool changed = false;
            for (Eigen::Index k = 0; k < n_bar; ++k) {
                if (counts(k) > 0.0) {
                    const Vector mean = sums.col(k) / counts(k);
                    if ((mean - C.col(k)).squaredNorm() > 0.0) changed = true;
                    C.col(k) = mean;
                }
            }
            if (!changed) break;
        }
        const double sse = detail::kmeans_sse(X, C, assign);
        if (sse < best_sse) {
            best_sse = sse;
            best_C = C;
        }
    }
    for (Eigen::Index k = 0; k < n_bar; ++k) best_C.col(k) /= best_C.col(k).sum();
    return HistogramStream::from_matrix(best_C);
}

/// Closed-form mean bias coefficients, fixed across outer iterations.
inline Vector mean_beta(const HistogramStream& Ybar, const HistogramStream& Ystar,
                        const std::vector<KldsDescriptor>& descriptors, const KernelSpec& spec,
                        double ridge) {
    const std::size_t K = descriptors.size();
    Vector b(Ystar.length());
    Eigen::Index at = 0;
    for (const auto& t : descriptors) {
        b.segment(at, t.samples()) = t.beta;
        at += t.samples();
    }
    Matrix Kbar = gram(Ybar, Ybar, spec).values;
    Kbar.diagonal().array() += ridge;
    const Matrix Kcross = gram(Ybar, Ystar, spec).values;
    Eigen::LDLT<Matrix> ldlt(Kbar);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("mean_beta: regularized landmark Gram is singular");
    return ldlt.solve(Kcross * b) / double(K);
}

/// Euclidean average of the aligned state transitions.
inline Matrix mean_A(const std::vector<Matrix>& A_list, const std::vector<Matrix>& Q_list) {
    if (A_list.empty() || A_list.size() != Q_list.size())
        throw InputError("mean_A: mismatched inputs");
    Matrix acc = Matrix::Zero(A_list.front().rows(), A_list.front().cols());
    for (std::size_t i = 0; i < A_list.size(); ++i)
        acc += Q_list[i].transpose() * A_list[i] * Q_list[i];
    return acc / double(A_list.size());
}

/// Orthonormality-constrained mean observer coefficients via EVD of the
/// landmark Gram and an SVD projection of the stacked aligned coefficients.
inline Matrix mean_alpha(const HistogramStream& Ybar, const HistogramStream& Ystar,
                         const std::vector<KldsDescriptor>& descriptors,
                         const std::vector<Matrix>& Q_list, const KernelSpec& spec) {
    if (descriptors.empty() || descriptors.size() != Q_list.size())
        throw InputError("mean_alpha: mismatched inputs");
    const Eigen::Index n = descriptors.front().order();

    Matrix a(Ystar.length(), n);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        a.middleRows(at, descriptors[i].samples()) = descriptors[i].alpha * Q_list[i];
        at += descriptors[i].samples();
    }

    const Matrix Kbar = gram(Ybar, Ybar, spec).values;
    Eigen::SelfAdjointEigenSolver<Matrix> evd(Kbar);
    if (evd.info() != Eigen::Success) throw NumericalError("mean_alpha: EVD failed");
    Vector lambda = evd.eigenvalues().reverse();
    Matrix V = evd.eigenvectors().rowwise().reverse();
    detail::fix_column_signs(V);
    const double lmax = lambda(0);
    if (!(lmax > 0.0)) throw NumericalError("mean_alpha: landmark Gram is zero");
    Eigen::Index rank = 0;
    while (rank < lambda.size() && lambda(rank) > 1e-10 * lmax) ++rank;
    if (rank < n)
        throw NumericalError("mean_alpha: landmark Gram numerically rank-deficient (rank " +
                             std::to_string(rank) + ", need " + std::to_string(n) + ")");
    const Vector lr = lambda.head(rank);
    const Matrix Vr = V.leftCols(rank);

    const Matrix W = lr.cwiseSqrt().cwiseInverse().asDiagonal() * Vr.transpose();
    const Matrix target = W * gram(Ybar, Ystar, spec).values * a;  // rank x n
    Eigen::JacobiSVD<Matrix> svd(target, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix Z = svd.matrixU() * svd.matrixV().transpose();
    return Vr * lr.cwiseSqrt().cwiseInverse().asDiagonal() * Z;
}

inline std::size_t medoid(const std::vector<KldsDescriptor>& descriptors, const DistanceWeights& w,
                          const AlignOptions& align_opts = {});

/// Fréchet mean under the alignment distance via alternating minimization:
/// landmarks and beta fixed up front, {A, alpha} updates interleaved with
/// re-alignment of each member.
inline FrechetResult frechet_mean(const std::vector<KldsDescriptor>& descriptors,
                                  const DistanceWeights& w, const MeanOptions& mean_opts = {},
                                  const AlignOptions& align_opts = {}) {
    if (descriptors.empty()) throw InputError("frechet_mean: empty set");
    check_weights(w);
    const Eigen::Index n = descriptors.front().order();
    const KernelSpec spec = descriptors.front().kernel;
    for (const auto& t : descriptors)
        if (t.order() != n) throw InputError("frechet_mean: mixed state dimensions");
    if (mean_opts.n_bar != 0 && mean_opts.n_bar < n)
        throw InputError("frechet_mean: n_bar must be 0 or >= n");

    const std::size_t K = descriptors.size();
    const HistogramStream Ystar = concat_samples(descriptors);
    const HistogramStream Ybar =
        mean_opts.n_bar == 0 ? Ystar
                             : kmeans_landmarks(Ystar, mean_opts.n_bar, mean_opts.seed,
                                                mean_opts.kmeans_iters, mean_opts.kmeans_restarts);
    const Vector beta_bar = mean_beta(Ybar, Ystar, descriptors, spec, mean_opts.ridge);

    std::vector<Matrix> A_list;
    for (const auto& t : descriptors) A_list.push_back(t.A);

    // Initialize the aligners against the medoid. The first closed-form
    // update then minimizes the objective over means for aligners that
    // already realize the medoid cost, so the iteration starts at or below
    // the best single set element.
    std::vector<Matrix> Q_list(K, Matrix::Identity(n, n));
    if (K > 1) {
        const std::size_t m = medoid(descriptors, w, align_opts);
        for (std::size_t i = 0; i < K; ++i)
            Q_list[i] = alignment_distance(descriptors[m], descriptors[i], w, align_opts).Q;
    }

    FrechetResult res;
    double prev_g = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < mean_opts.max_outer; ++outer) {
        KldsDescriptor mean;
        mean.A = mean_A(A_list, Q_list);
        mean.Y = Ybar;
        mean.alpha = mean_alpha(Ybar, Ystar, descriptors, Q_list, spec);
        mean.beta = beta_bar;
        mean.kernel = spec;

        double g = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            AlignOptions opts = align_opts;
            opts.extra_inits.push_back(Q_list[i]);  // warm start from the previous aligner
            const AlignmentResult r = alignment_distance(mean, descriptors[i], w, opts);
            Q_list[i] = r.Q;
            g += r.dist_sq;
        }
        g /= double(K);

        res.mean = std::move(mean);
        res.aligners = Q_list;
        res.cost_trace.push_back(g);
        if (std::abs(prev_g - g) <= mean_opts.outer_tol * std::max(1.0, std::abs(g))) {
            res.converged = true;
            break;
        }
        prev_g = g;
    }
    return res;
}

/// Index of the set element minimizing the sum of squared alignment distances
/// to all others; ties break to the smallest index.
inline std::size_t medoid(const std::vector<KldsDescriptor>& descriptors, const DistanceWeights& w,
                          const AlignOptions& align_opts) {
    if (descriptors.empty()) throw InputError("medoid: empty set");
    const std::size_t K = descriptors.size();
    Matrix D = Matrix::Zero(long(K), long(K));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) {
            const double d = alignment_distance(descriptors[i], descriptors[j], w, align_opts).dist_sq;
            D(long(i), long(j)) = d;
            D(long(j), long(i)) = d;
        }
    std::size_t best = 0;
    double best_sum = D.row(0).sum();
    for (std::size_t i = 1; i < K; ++i) {
        const double s = D.row(long(i)).sum();
        if (s < best_sum) {
            best_sum = s;
            best = i;
        }
    }
    return best;
}

}  // namespace sob

#endif
