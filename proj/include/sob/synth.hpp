#ifndef SOB_SYNTH_HPP
#define SOB_SYNTH_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sob/common.hpp"
#include "sob/kernel.hpp"

namespace sob {

struct SynthSpec {
    int n_classes = 3;
    int per_class = 10;
    Eigen::Index p = 16;     // histogram dimension
    Eigen::Index N = 60;     // stream length
    int n = 4;               // latent state dimension
    std::uint64_t seed = 0;
    double within_class_noise = 0.05;
    double between_class_separation = 1.0;
};

struct SynthStream {
    HistogramStream stream;
    std::string label;
};

namespace detail {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = gauss(rng);
    return M;
}

inline double softplus(double z) {
    // Numerically stable log(1 + e^z).
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

/// Synthetic labeled histogram streams with known latent dynamics. Each class
/// draws a prototype stable transition and emission map; samples perturb both
/// by seeded Gaussian noise scaled by within_class_noise. Latent states are
/// driven by a class-shared excitation sequence so zero noise reproduces the
/// class prototype exactly, then mapped through a softplus and l1-normalized.
inline std::vector<SynthStream> synth_dataset(const SynthSpec& spec) {
    if (spec.n_classes < 1 || spec.per_class < 1 || spec.p < 1 || spec.N < 1 || spec.n < 1)
        throw InputError("synth_dataset: all counts must be >= 1");
    if (spec.within_class_noise < 0.0)
        throw InputError("synth_dataset: noise must be >= 0");

    std::mt19937_64 master(spec.seed);
    std::vector<SynthStream> out;
    for (int c = 0; c < spec.n_classes; ++c) {
        Matrix A_proto = detail::gaussian_matrix(spec.n, spec.n, master);
        A_proto *= 0.9 / spectral_norm(A_proto);
        const Matrix W_proto = detail::gaussian_matrix(spec.p, spec.n, master);
        const Vector offset = spec.between_class_separation * detail::gaussian_matrix(spec.p, 1, master);
        const Vector x0 = detail::gaussian_matrix(spec.n, 1, master);
        const Matrix excitation = detail::gaussian_matrix(spec.n, spec.N, master);

        for (int s = 0; s < spec.per_class; ++s) {
            std::mt19937_64 sample_rng(master());
            Matrix A = A_proto + spec.within_class_noise *
                                     detail::gaussian_matrix(spec.n, spec.n, sample_rng);
            A *= 0.9 / spectral_norm(A);
            const Matrix W = W_proto + spec.within_class_noise *
                                           detail::gaussian_matrix(spec.p, spec.n, sample_rng);

            Matrix Y(spec.p, spec.N);
            Vector x = x0;
            for (Eigen::Index t = 0; t < spec.N; ++t) {
                const Vector z = W * x + offset;
                for (Eigen::Index i = 0; i < spec.p; ++i) Y(i, t) = detail::softplus(z(i));
                Y.col(t) /= Y.col(t).sum();
                x = A * x + 0.5 * excitation.col(t);
            }
            out.push_back({HistogramStream::from_matrix(Y), "class_" + std::to_string(c)});
        }
    }
    return out;
}

}  // namespace sob

#endif
