// Acceptance harness: runs numbered criteria and prints one PASS/FAIL line
// each. Invoke with criterion numbers as arguments, or none to run all.
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sob/sob.hpp"
#include "test_helpers.hpp"

using namespace sob;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. Kernel basics on random histogram pairs plus centered-Gram PSD checks.
bool crit1(std::string& detail) {
    std::mt19937_64 rng(1001);
    const auto t0 = Clock::now();
    double worst_self = 0.0, worst_sym = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index p = 2 + Eigen::Index(rng() % 31);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double sparsity = trial % 3 == 0 ? 0.3 : 0.0;
        const Vector a = testing::random_stream(p, 1, rng, sparsity).column(0);
        const Vector b = testing::random_stream(p, 1, rng, sparsity).column(0);
        const double kab = chi2_kernel(a, b);
        if (!(kab > 0.0 && kab <= 1.0)) {
            detail = "kernel value out of (0,1]";
            return false;
        }
        worst_sym = std::max(worst_sym, std::abs(kab - chi2_kernel(b, a)));
        worst_self = std::max(worst_self, std::abs(chi2_kernel(a, a) - 1.0));
    }
    if (worst_self > 1e-12 || worst_sym > 1e-12) {
        detail = "self-similarity or symmetry violated";
        return false;
    }
    double min_eig = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index p = 2 + Eigen::Index(rng() % 15);
        const Eigen::Index N = 3 + Eigen::Index(rng() % 20);
        const HistogramStream s = testing::random_stream(p, N, rng);
        const Matrix C = center_gram(gram(s, s)).values;
        const Eigen::SelfAdjointEigenSolver<Matrix> evd(C);
        min_eig = std::min(min_eig, evd.eigenvalues().minCoeff());
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "min centered eigenvalue " << min_eig << ", " << elapsed << " s";
    detail = os.str();
    return min_eig >= -1e-9 && elapsed < 10.0;
}

// 2. Estimation invariants across random stream shapes.
bool crit2(std::string& detail) {
    std::mt19937_64 rng(1002);
    const auto t0 = Clock::now();
    double worst_orth = 0.0, worst_norm = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index p = 4 + Eigen::Index(rng() % 29);    // 4..32
        const Eigen::Index N = 10 + Eigen::Index(rng() % 91);   // 10..100
        const int n = 1 + int(rng() % 8);                       // 1..8
        EstimationOptions opts;
        opts.n = n;
        const KldsDescriptor theta = estimate(testing::random_stream(p, N, rng), opts);
        const Matrix K = gram(theta.Y, theta.Y).values;
        worst_orth = std::max(
            worst_orth,
            (theta.alpha.transpose() * K * theta.alpha - Matrix::Identity(n, n)).norm());
        worst_norm = std::max(worst_norm, spectral_norm(theta.A));
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "orth residual " << worst_orth << ", max ||A||_2 " << worst_norm << ", " << elapsed
       << " s";
    detail = os.str();
    return worst_orth <= 1e-8 && worst_norm <= 1.0 - 1e-6 && elapsed < 60.0;
}

// 3. Plane solver against a dense angle grid.
bool crit3(std::string& detail) {
    std::mt19937_64 rng(1003);
    const auto t0 = Clock::now();
    constexpr int kGrid = 100000;
    const double step = 2.0 * M_PI / double(kGrid);
    double worst_gap = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + int(rng() % 4);
        const Eigen::Index p_dim = 4 + Eigen::Index(rng() % 6);
        const Eigen::Index N = 8 + Eigen::Index(rng() % 8);
        const KldsDescriptor t1 = testing::random_descriptor(p_dim, N, n, rng);
        const KldsDescriptor t2 = testing::random_descriptor(p_dim, N, n, rng);
        const Eigen::Index pp = Eigen::Index(rng() % std::uint64_t(n - 1));
        const Eigen::Index qq = pp + 1 + Eigen::Index(rng() % std::uint64_t(n - 1 - pp));
        std::uniform_real_distribution<double> lam(0.05, 2.0);
        const DistanceWeights w{lam(rng), 0.0};

        const GivensCoeffs k = givens_coeffs(t1, t2, pp, qq, w);
        const auto value = [&k](double c, double s) {
            return k.k0 * c * c + k.k1 * s * s + k.k2 * c * s + k.k3 * c + k.k4 * s;
        };
        const auto [c, s] = solve_givens(t1, t2, pp, qq, w);
        const double got = value(c, s);
        double grid_max = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < kGrid; ++i) {
            const double th = step * double(i);
            grid_max = std::max(grid_max, value(std::cos(th), std::sin(th)));
        }
        worst_gap = std::max(worst_gap, grid_max - got);
        if (got < grid_max - 1e-6) {
            std::ostringstream os;
            os << "trial " << trial << ": solver below grid by " << grid_max - got;
            detail = os.str();
            return false;
        }
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "worst grid gap " << worst_gap << ", " << elapsed << " s";
    detail = os.str();
    return elapsed < 120.0;
}

// 4. Per-plane monotonicity and sweep convergence.
bool crit4(std::string& detail) {
    std::mt19937_64 rng(1004);
    int converged = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + int(rng() % 4);
        const Eigen::Index p_dim = 4 + Eigen::Index(rng() % 6);
        const Eigen::Index N = 8 + Eigen::Index(rng() % 8);
        const KldsDescriptor t1 = testing::random_descriptor(p_dim, N, n, rng);
        const KldsDescriptor t2 = testing::random_descriptor(p_dim, N, n, rng);
        const DistanceWeights w{0.25, 0.0};
        AlignOptions opts;
        opts.seed = std::uint64_t(trial);
        const Matrix Q0 = testing::random_orthogonal(n, rng, trial % 2 == 0 ? 1 : -1);
        const AlignmentResult r = jacobi_align(t1, t2, Q0, w, opts);
        for (std::size_t i = 1; i < r.plane_trace.size(); ++i) {
            const double tolerance = 1e-10 * std::max(1.0, std::abs(r.plane_trace[i]));
            if (r.plane_trace[i] < r.plane_trace[i - 1] - tolerance) {
                std::ostringstream os;
                os << "trial " << trial << ": rho decreased at plane update " << i;
                detail = os.str();
                return false;
            }
        }
        if (r.converged) ++converged;
    }
    std::ostringstream os;
    os << converged << "/100 runs converged";
    detail = os.str();
    return converged >= 99;
}

// 5. n=2 alignment distance against exhaustive search over both O(2) components.
bool crit5(std::string& detail) {
    std::mt19937_64 rng(1005);
    const auto t0 = Clock::now();
    constexpr int kGrid = 1000000;
    const double step = 2.0 * M_PI / double(kGrid);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index p_dim = 4 + Eigen::Index(rng() % 6);
        const Eigen::Index N = 8 + Eigen::Index(rng() % 8);
        const KldsDescriptor t1 = testing::random_descriptor(p_dim, N, 2, rng);
        const KldsDescriptor t2 = testing::random_descriptor(p_dim, N, 2, rng);
        const DistanceWeights w{0.25, 0.0};
        AlignOptions opts;
        opts.seed = std::uint64_t(trial);
        const double got = alignment_distance(t1, t2, w, opts).dist_sq;

        const sob::detail::AlignProblem prob = sob::detail::prepare(t1, t2, w);
        const double b11 = prob.A1(0, 0), b12 = prob.A1(0, 1), b21 = prob.A1(1, 0),
                     b22 = prob.A1(1, 1);
        const double a11 = prob.A2(0, 0), a12 = prob.A2(0, 1), a21 = prob.A2(1, 0),
                     a22 = prob.A2(1, 1);
        const double m11 = prob.M0(0, 0), m12 = prob.M0(0, 1), m21 = prob.M0(1, 0),
                     m22 = prob.M0(1, 1);
        double best_rho = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < kGrid; ++i) {
            const double th = step * double(i);
            const double c = std::cos(th), s = std::sin(th);
            // Rotation component: Q = [[c, -s], [s, c]].
            {
                const double t11 = c * (a11 * c + a12 * s) + s * (a21 * c + a22 * s);
                const double t12 = c * (-a11 * s + a12 * c) + s * (-a21 * s + a22 * c);
                const double t21 = -s * (a11 * c + a12 * s) + c * (a21 * c + a22 * s);
                const double t22 = -s * (-a11 * s + a12 * c) + c * (-a21 * s + a22 * c);
                const double r = prob.lambda_A * (b11 * t11 + b12 * t12 + b21 * t21 + b22 * t22) +
                                 (m11 * c + m12 * s) + (-m21 * s + m22 * c);
                best_rho = std::max(best_rho, r);
            }
            // Reflection component: Q = [[c, s], [s, -c]].
            {
                const double t11 = c * (a11 * c + a12 * s) + s * (a21 * c + a22 * s);
                const double t12 = c * (a11 * s - a12 * c) + s * (a21 * s - a22 * c);
                const double t21 = s * (a11 * c + a12 * s) - c * (a21 * c + a22 * s);
                const double t22 = s * (a11 * s - a12 * c) - c * (a21 * s - a22 * c);
                const double r = prob.lambda_A * (b11 * t11 + b12 * t12 + b21 * t21 + b22 * t22) +
                                 (m11 * c + m12 * s) + (m21 * s - m22 * c);
                best_rho = std::max(best_rho, r);
            }
        }
        const double oracle = std::max(0.0, prob.tau - 2.0 * best_rho);
        worst = std::max(worst, std::abs(got - oracle));
        if (std::abs(got - oracle) > 1e-6) {
            std::ostringstream os;
            os << "trial " << trial << ": |got - oracle| = " << std::abs(got - oracle);
            detail = os.str();
            return false;
        }
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "worst |got - oracle| " << worst << ", " << elapsed << " s";
    detail = os.str();
    return elapsed < 600.0;
}

// 6. Zero distance within an equivalence class.
bool crit6(std::string& detail) {
    std::mt19937_64 rng(1006);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + int(rng() % 2);
        const Eigen::Index p_dim = 4 + Eigen::Index(rng() % 6);
        const Eigen::Index N = 8 + Eigen::Index(rng() % 8);
        const KldsDescriptor t = testing::random_descriptor(p_dim, N, n, rng);
        const Matrix Q = testing::random_orthogonal(n, rng, trial % 2 == 0 ? 1 : -1);
        const DistanceWeights w{0.25, 0.0};
        AlignOptions opts;
        opts.seed = std::uint64_t(trial);
        const double d = alignment_distance(t, transform(t, Q), w, opts).dist_sq;
        worst = std::max(worst, d);
        if (d > 1e-8) {
            std::ostringstream os;
            os << "trial " << trial << ": dist_sq " << d;
            detail = os.str();
            return false;
        }
    }
    std::ostringstream os;
    os << "worst dist_sq " << worst;
    detail = os.str();
    return true;
}

// 7. Metric-axiom statistics at n=3 with a positive bias weight.
bool crit7(std::string& detail) {
    std::mt19937_64 rng(1007);
    const DistanceWeights w{0.25, 0.5};
    AlignOptions opts;
    opts.seed = 7;
    opts.n_init = 24;  // symmetry needs both directions to find the global optimum
    opts.tol = 1e-12;
    std::vector<KldsDescriptor> pool;
    for (int i = 0; i < 25; ++i) pool.push_back(testing::random_descriptor(6, 12, 3, rng));

    double worst_sym = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t i = rng() % pool.size();
        std::size_t j = rng() % pool.size();
        if (j == i) j = (j + 1) % pool.size();
        const double d12 = std::sqrt(alignment_distance(pool[i], pool[j], w, opts).dist_sq);
        const double d21 = std::sqrt(alignment_distance(pool[j], pool[i], w, opts).dist_sq);
        const double rel = std::abs(d12 - d21) / std::max({d12, d21, 1e-12});
        worst_sym = std::max(worst_sym, rel);
    }
    if (worst_sym > 1e-4) {
        std::ostringstream os;
        os << "symmetry relative error " << worst_sym;
        detail = os.str();
        return false;
    }

    // Cache all pairwise distances once for the triangle sampling.
    Matrix D = Matrix::Zero(25, 25);
    for (int i = 0; i < 25; ++i)
        for (int j = i + 1; j < 25; ++j) {
            D(i, j) = std::sqrt(
                alignment_distance(pool[std::size_t(i)], pool[std::size_t(j)], w, opts).dist_sq);
            D(j, i) = D(i, j);
        }
    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const long i = long(rng() % 25), j = long(rng() % 25), k = long(rng() % 25);
        if (D(i, k) <= D(i, j) + D(j, k) + 1e-6) ++ok;
    }
    std::ostringstream os;
    os << "symmetry rel err " << worst_sym << ", triangle holds on " << ok << "/1000 triples";
    detail = os.str();
    return ok >= 990;
}

// 8. Frechet mean behavior on random sets and on a single equivalence class.
bool crit8(std::string& detail) {
    std::mt19937_64 rng(1008);
    const DistanceWeights w{0.25, 0.0};
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 2 + int(rng() % 5);
        std::vector<KldsDescriptor> set;
        for (int i = 0; i < K; ++i) set.push_back(testing::random_descriptor(5, 8, 2, rng));
        AlignOptions opts;
        opts.seed = std::uint64_t(trial);
        const FrechetResult r = frechet_mean(set, w, {}, opts);
        for (std::size_t i = 1; i < r.cost_trace.size(); ++i) {
            if (r.cost_trace[i] > r.cost_trace[i - 1] + 1e-9) {
                std::ostringstream os;
                os << "trial " << trial << ": cost increased at iteration " << i;
                detail = os.str();
                return false;
            }
        }
        const std::size_t m = medoid(set, w, opts);
        double g_med = 0.0;
        for (const auto& t : set) g_med += alignment_distance(set[m], t, w, opts).dist_sq;
        g_med /= double(K);
        if (r.cost_trace.back() > g_med + 1e-6) {
            std::ostringstream os;
            os << "trial " << trial << ": mean cost " << r.cost_trace.back() << " > medoid cost "
               << g_med;
            detail = os.str();
            return false;
        }
    }
    double worst_cls = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const KldsDescriptor t = testing::random_descriptor(5, 10, 2, rng);
        std::vector<KldsDescriptor> cls = {t, transform(t, testing::random_orthogonal(2, rng)),
                                           transform(t, testing::random_orthogonal(2, rng, -1))};
        AlignOptions opts;
        opts.seed = std::uint64_t(trial);
        const FrechetResult r = frechet_mean(cls, w, {}, opts);
        worst_cls = std::max(worst_cls, r.cost_trace.back());
    }
    std::ostringstream os;
    os << "worst equivalence-class cost " << worst_cls;
    detail = os.str();
    return worst_cls <= 1e-4;
}

// 9. End-to-end synthetic classification.
bool crit9(std::string& detail) {
    const auto t0 = Clock::now();
    SynthSpec spec;
    spec.n_classes = 3;
    spec.per_class = 15;
    spec.p = 16;
    spec.N = 60;
    spec.n = 4;
    spec.seed = 42;
    const auto streams = synth_dataset(spec);

    EstimationOptions eopts;
    eopts.n = 4;
    LabeledDataset train, test;
    for (int c = 0; c < 3; ++c)
        for (int s = 0; s < 15; ++s) {
            const auto& item = streams[std::size_t(c * 15 + s)];
            auto& dst = s < 10 ? train : test;
            dst.items.push_back({estimate(item.stream, eopts), item.label});
        }

    const DistanceWeights w{0.25, 0.0};
    AlignOptions aopts;
    aopts.seed = 42;
    const double nn_acc = nn_classify(train, test, w, aopts).accuracy;

    MeanOptions mopts;
    mopts.seed = 42;
    const ClassModel frechet_model = ncc_train(train, w, mopts, aopts, CenterKind::FrechetMean);
    const double ncc_frechet = ncc_classify(frechet_model, test, w, aopts).accuracy;
    const ClassModel medoid_model = ncc_train(train, w, mopts, aopts, CenterKind::Medoid);
    const double ncc_medoid = ncc_classify(medoid_model, test, w, aopts).accuracy;

    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "1-NN " << nn_acc << ", NCC-frechet " << ncc_frechet << ", NCC-medoid " << ncc_medoid
       << ", " << elapsed << " s";
    detail = os.str();
    return nn_acc >= 0.9 && ncc_frechet >= 0.85 && ncc_frechet >= ncc_medoid && elapsed < 900.0;
}

// 10. Runtime gate for a single alignment at n=5.
bool crit10(std::string& detail) {
    std::mt19937_64 rng(1010);
    const KldsDescriptor t1 = testing::random_descriptor(16, 60, 5, rng);
    const KldsDescriptor t2 = testing::random_descriptor(16, 60, 5, rng);
    const DistanceWeights w{0.25, 0.0};
    std::vector<double> times;
    for (int rep = 0; rep < 11; ++rep) {
        AlignOptions opts;
        opts.seed = std::uint64_t(rep);
        const auto t0 = Clock::now();
        volatile double d = alignment_distance(t1, t2, w, opts).dist_sq;
        (void)d;
        times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];
    std::ostringstream os;
    os << "median alignment time " << median << " s over " << times.size() << " runs";
    detail = os.str();
    return median <= 0.25;
}

}  // namespace

int main(int argc, char** argv) {
    using Criterion = bool (*)(std::string&);
    const Criterion criteria[] = {crit1, crit2, crit3, crit4, crit5,
                                  crit6, crit7, crit8, crit9, crit10};
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (int i = 1; i <= 10; ++i) which.push_back(i);

    bool all_ok = true;
    for (int id : which) {
        if (id < 1 || id > 10) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 1;
        }
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[id - 1](detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s — %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
