#ifndef SOB_TEST_HELPERS_HPP
#define SOB_TEST_HELPERS_HPP

#include <random>

#include "sob/align.hpp"
#include "sob/klds.hpp"

namespace sob::testing {

inline Vector random_histogram(Eigen::Index p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Vector h(p);
    for (Eigen::Index i = 0; i < p; ++i) h(i) = uni(rng);
    return h / h.sum();
}

/// Random histogram stream with an optional fraction of zeroed bins, so
/// kernel support handling gets exercised.
inline HistogramStream random_stream(Eigen::Index p, Eigen::Index N, std::mt19937_64& rng,
                                     double sparsity = 0.0) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Matrix Y(p, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        Vector h = random_histogram(p, rng);
        if (sparsity > 0.0) {
            for (Eigen::Index i = 0; i < p; ++i)
                if (uni(rng) < sparsity) h(i) = 0.0;
            if (h.sum() == 0.0) h(0) = 1.0;
            h /= h.sum();
        }
        Y.col(j) = h;
    }
    return HistogramStream::from_matrix(Y);
}

inline KldsDescriptor random_descriptor(Eigen::Index p, Eigen::Index N, int n,
                                        std::mt19937_64& rng) {
    EstimationOptions opts;
    opts.n = n;
    return estimate(random_stream(p, N, rng), opts);
}

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng, int det_sign = 1) {
    return sob::detail::random_orthogonal(n, rng, det_sign);
}

}  // namespace sob::testing

#endif
