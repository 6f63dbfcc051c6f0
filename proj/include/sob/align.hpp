#ifndef SOB_ALIGN_HPP
#define SOB_ALIGN_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sob/common.hpp"
#include "sob/klds.hpp"

namespace sob {

struct DistanceWeights {
    double lambda_A = 0.25;
    double lambda_mu = 0.0;
};

inline void check_weights(const DistanceWeights& w) {
    if (!(w.lambda_A > 0.0)) throw InputError("weights: lambda_A must be > 0");
    if (!(w.lambda_mu >= 0.0)) throw InputError("weights: lambda_mu must be >= 0");
}

/// Coefficients of the (c, s) quadratic restricted to one rotation plane:
/// rho(c, s) = k0 c^2 + k1 s^2 + k2 cs + k3 c + k4 s + const.
struct GivensCoeffs {
    double k0 = 0, k1 = 0, k2 = 0, k3 = 0, k4 = 0;
};

struct AlignOptions {
    double tol = 1e-10;       // relative rho change per sweep
    int max_sweeps = 100;
    int n_init = 4;           // random candidates per O(n) component
    std::uint64_t seed = 0;
    bool include_canonical_inits = true;
    std::vector<Matrix> extra_inits;  // warm starts, used as-is
};

struct AlignmentResult {
    Matrix Q;
    double dist_sq = 0.0;
    std::vector<double> rho_trace;    // rho at init and after each sweep
    std::vector<double> plane_trace;  // rho at init and after each plane update
    int sweeps = 0;
    bool converged = false;
    int det_sign = 1;
};

namespace detail {

inline void check_pair(const KldsDescriptor& t1, const KldsDescriptor& t2) {
    if (t1.order() != t2.order()) throw InputError("align: descriptors have different state dimensions");
    if (t1.dim() != t2.dim()) throw InputError("align: descriptors have different histogram dimensions");
}

/// Precomputed data for aligning a fixed descriptor pair.
struct AlignProblem {
    Matrix A1, A2;
    Matrix M0;        // alpha1^T kappa(Y1, Y2) alpha2
    double lambda_A = 0.25;
    double tau = 0.0;
};

inline AlignProblem prepare(const KldsDescriptor& t1, const KldsDescriptor& t2, const DistanceWeights& w) {
    check_weights(w);
    check_pair(t1, t2);
    AlignProblem prob;
    prob.A1 = t1.A;
    prob.A2 = t2.A;
    prob.M0 = t1.alpha.transpose() * gram(t1.Y, t2.Y, t1.kernel).values * t2.alpha;
    prob.lambda_A = w.lambda_A;
    const double mu_sq = mu_inner(t1, t1) + mu_inner(t2, t2) - 2.0 * mu_inner(t1, t2);
    const double n = double(t1.order());
    prob.tau = w.lambda_A * (t1.A.squaredNorm() + t2.A.squaredNorm()) + w.lambda_mu * mu_sq + 2.0 * n;
    return prob;
}

inline double rho_at(const AlignProblem& prob, const Matrix& Q) {
    return prob.lambda_A * (prob.A1.cwiseProduct(Q.transpose() * prob.A2 * Q)).sum() +
           (prob.M0 * Q).trace();
}

/// Plane-restricted quadratic coefficients from the two trace products,
/// expanded over the rows and columns p and q. B is the reference transition,
/// T the current rotated transition, M the current rotated cross term.
inline GivensCoeffs plane_coeffs(const Matrix& B, const Matrix& T, const Matrix& M,
                                 Eigen::Index p, Eigen::Index q, double lambda_A) {
    GivensCoeffs k;
    k.k0 = lambda_A * (B(p, p) * T(p, p) + B(p, q) * T(p, q) + B(q, p) * T(q, p) + B(q, q) * T(q, q));
    k.k1 = lambda_A * (B(q, q) * T(p, p) + B(p, p) * T(q, q) - B(q, p) * T(p, q) - B(p, q) * T(q, p));
    k.k2 = lambda_A * (B(q, p) * T(p, p) + B(p, q) * T(p, p) - B(p, p) * T(p, q) + B(q, q) * T(p, q) -
                       B(p, p) * T(q, p) + B(q, q) * T(q, p) - B(q, p) * T(q, q) - B(p, q) * T(q, q));
    double lin_c = 0.0, lin_s = 0.0;
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        if (j == p || j == q) continue;
        lin_c += B(p, j) * T(p, j) + B(q, j) * T(q, j);   // rotated rows
        lin_s += B(q, j) * T(p, j) - B(p, j) * T(q, j);
        lin_c += B(j, p) * T(j, p) + B(j, q) * T(j, q);   // rotated columns
        lin_s += B(j, q) * T(j, p) - B(j, p) * T(j, q);
    }
    k.k3 = lambda_A * lin_c + M(p, p) + M(q, q);
    k.k4 = lambda_A * lin_s + M(q, p) - M(p, q);
    return k;
}

/// Real roots of a polynomial given coefficients from highest to lowest degree,
/// via the companion-matrix eigenvalue method.
inline std::vector<double> real_poly_roots(std::vector<double> coeffs, double imag_tol = 1e-8) {
    double scale = 0.0;
    for (double c : coeffs) scale = std::max(scale, std::abs(c));
    std::vector<double> roots;
    if (scale == 0.0) return roots;
    // Trim negligible leading coefficients.
    std::size_t lead = 0;
    while (lead + 1 < coeffs.size() && std::abs(coeffs[lead]) <= 1e-14 * scale) ++lead;
    coeffs.erase(coeffs.begin(), coeffs.begin() + long(lead));
    const std::size_t deg = coeffs.size() - 1;
    if (deg == 0) return roots;
    if (deg == 1) {
        roots.push_back(-coeffs[1] / coeffs[0]);
        return roots;
    }
    Matrix C = Matrix::Zero(long(deg), long(deg));
    for (std::size_t i = 0; i < deg; ++i) C(0, long(i)) = -coeffs[i + 1] / coeffs[0];
    for (std::size_t i = 1; i < deg; ++i) C(long(i), long(i - 1)) = 1.0;
    Eigen::EigenSolver<Matrix> es(C, /*computeEigenvectors=*/false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= imag_tol) roots.push_back(z.real());
    }
    return roots;
}

/// Global maximizer of the plane-restricted quadratic over the unit circle.
/// Candidates are the real quartic roots clipped to [-1, 1] plus the boundary
/// points; ties go to the smallest |s|, then to positive c.
inline std::pair<double, double> solve_plane(const GivensCoeffs& k) {
    const double a = k.k1 - k.k0;
    std::vector<double> quartic = {
        -4.0 * (a * a + k.k2 * k.k2),
        -4.0 * (k.k4 * a + k.k2 * k.k3),
        4.0 * a * a + 4.0 * k.k2 * k.k2 - k.k4 * k.k4 - k.k3 * k.k3,
        2.0 * (2.0 * k.k4 * a + k.k2 * k.k3),
        k.k4 * k.k4 - k.k2 * k.k2,
    };
    std::vector<double> cands = real_poly_roots(quartic);
    for (double& s : cands) s = std::clamp(s, -1.0, 1.0);
    cands.push_back(0.0);
    cands.push_back(1.0);
    cands.push_back(-1.0);

    const auto value = [&k](double c, double s) {
        return k.k0 * c * c + k.k1 * s * s + k.k2 * c * s + k.k3 * c + k.k4 * s;
    };
    double best_c = 1.0, best_s = 0.0;
    double best_v = value(best_c, best_s);
    const double tie = 1e-12;
    for (double s : cands) {
        const double cm = std::sqrt(std::max(0.0, 1.0 - s * s));
        for (double c : {cm, -cm}) {
            const double v = value(c, s);
            const bool better =
                v > best_v + tie ||
                (v >= best_v - tie && (std::abs(s) < std::abs(best_s) - tie ||
                                       (std::abs(std::abs(s) - std::abs(best_s)) <= tie && c > best_c)));
            if (better) {
                best_v = v;
                best_c = c;
                best_s = s;
            }
        }
    }
    return {best_c, best_s};
}

/// Right-multiply X by G_{p,q}(c, s).
inline void apply_right(Matrix& X, Eigen::Index p, Eigen::Index q, double c, double s) {
    const Vector xp = X.col(p), xq = X.col(q);
    X.col(p) = c * xp - s * xq;
    X.col(q) = s * xp + c * xq;
}

/// Left-multiply X by G_{p,q}(c, s)^T.
inline void apply_left_t(Matrix& X, Eigen::Index p, Eigen::Index q, double c, double s) {
    const Eigen::RowVectorXd xp = X.row(p), xq = X.row(q);
    X.row(p) = c * xp - s * xq;
    X.row(q) = s * xp + c * xq;
}

inline AlignmentResult jacobi_core(const AlignProblem& prob, const Matrix& Q0,
                                   const AlignOptions& opts, std::mt19937_64& rng) {
    require_orthogonal(Q0, "jacobi_align");
    const Eigen::Index n = prob.A1.rows();
    AlignmentResult res;
    res.det_sign = Q0.determinant() > 0.0 ? 1 : -1;

    Matrix Q = Q0;
    Matrix At = Q.transpose() * prob.A2 * Q;
    Matrix M = prob.M0 * Q;
    auto current_rho = [&]() {
        return prob.lambda_A * (prob.A1.cwiseProduct(At)).sum() + M.trace();
    };
    double rho = current_rho();
    res.rho_trace.push_back(rho);
    res.plane_trace.push_back(rho);

    std::vector<std::pair<Eigen::Index, Eigen::Index>> planes;
    for (Eigen::Index p = 0; p < n - 1; ++p)
        for (Eigen::Index q = p + 1; q < n; ++q) planes.emplace_back(p, q);

    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        std::shuffle(planes.begin(), planes.end(), rng);
        for (const auto& [p, q] : planes) {
            const GivensCoeffs k = plane_coeffs(prob.A1, At, M, p, q, prob.lambda_A);
            const auto [c, s] = solve_plane(k);
            if (!(c == 1.0 && s == 0.0)) {
                apply_right(At, p, q, c, s);
                apply_left_t(At, p, q, c, s);
                apply_right(M, p, q, c, s);
                apply_right(Q, p, q, c, s);
                rho = current_rho();
            }
            res.plane_trace.push_back(rho);
        }
        res.sweeps = sweep;
        const double prev = res.rho_trace.back();
        res.rho_trace.push_back(rho);
        if (std::abs(rho - prev) <= opts.tol * std::max(1.0, std::abs(rho))) {
            res.converged = true;
            break;
        }
        if (sweep % 20 == 0) {
            // Bound orthogonality drift from accumulated Givens products.
            Q = polar_orthogonal(Q);
            At = Q.transpose() * prob.A2 * Q;
            M = prob.M0 * Q;
            rho = current_rho();
        }
    }
    res.Q = Q;
    res.dist_sq = std::max(0.0, prob.tau - 2.0 * rho);
    return res;
}

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng, int det_sign) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix G(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) G(i, j) = gauss(rng);
    const Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    if (Q.determinant() * det_sign < 0.0) Q.col(n - 1) = -Q.col(n - 1);
    return Q;
}

}  // namespace detail

/// Q-independent part of the squared Frobenius distance, in the simplified
/// form valid under the orthonormality constraint.
inline double tau(const KldsDescriptor& t1, const KldsDescriptor& t2, const DistanceWeights& w) {
    check_weights(w);
    detail::check_pair(t1, t2);
    const double mu_sq = mu_inner(t1, t1) + mu_inner(t2, t2) - 2.0 * mu_inner(t1, t2);
    return w.lambda_A * (t1.A.squaredNorm() + t2.A.squaredNorm()) + w.lambda_mu * mu_sq +
           2.0 * double(t1.order());
}

/// Q-dependent part: lambda_A tr(A1^T Q^T A2 Q) + tr(alpha1^T kappa(Y1,Y2) alpha2 Q).
inline double rho(const KldsDescriptor& t1, const KldsDescriptor& t2, const Matrix& Q,
                  const DistanceWeights& w) {
    check_weights(w);
    detail::check_pair(t1, t2);
    require_orthogonal(Q, "rho");
    const Matrix M = t1.alpha.transpose() * gram(t1.Y, t2.Y, t1.kernel).values * t2.alpha;
    return w.lambda_A * (t1.A.cwiseProduct(Q.transpose() * t2.A * Q)).sum() + (M * Q).trace();
}

inline double frob_dist_sq(const KldsDescriptor& t1, const KldsDescriptor& t2, const Matrix& Q,
                           const DistanceWeights& w) {
    return std::max(0.0, tau(t1, t2, w) - 2.0 * rho(t1, t2, Q, w));
}

/// Quadratic-form coefficients of rho(theta, G_{p,q}(c,s) . theta_tilde) in (c, s).
/// Indices are zero-based with 0 <= p < q < n.
inline GivensCoeffs givens_coeffs(const KldsDescriptor& theta, const KldsDescriptor& theta_tilde,
                                  Eigen::Index p, Eigen::Index q, const DistanceWeights& w) {
    check_weights(w);
    detail::check_pair(theta, theta_tilde);
    const Eigen::Index n = theta.order();
    if (p < 0 || q <= p || q >= n)
        throw InputError("givens_coeffs: plane indices out of range");
    const Matrix M = theta.alpha.transpose() * gram(theta.Y, theta_tilde.Y, theta.kernel).values *
                     theta_tilde.alpha;
    return detail::plane_coeffs(theta.A, theta_tilde.A, M, p, q, w.lambda_A);
}

/// Global maximizer (c, s) of the plane-restricted rho.
inline std::pair<double, double> solve_givens(const KldsDescriptor& theta,
                                              const KldsDescriptor& theta_tilde, Eigen::Index p,
                                              Eigen::Index q, const DistanceWeights& w) {
    return detail::solve_plane(givens_coeffs(theta, theta_tilde, p, q, w));
}

/// One Jacobi run from a fixed initialization; stays in the O(n) component of Q0.
inline AlignmentResult jacobi_align(const KldsDescriptor& t1, const KldsDescriptor& t2,
                                    const Matrix& Q0, const DistanceWeights& w,
                                    const AlignOptions& opts = {}) {
    const detail::AlignProblem prob = detail::prepare(t1, t2, w);
    std::mt19937_64 rng(opts.seed);
    return detail::jacobi_core(prob, Q0, opts, rng);
}

/// Alignment distance: best Jacobi run over initializations in both components
/// of O(n). Canonical starts (I and the single-reflection diagonal) are run
/// directly; each random batch contributes its best-rho element as a start.
inline AlignmentResult alignment_distance(const KldsDescriptor& t1, const KldsDescriptor& t2,
                                          const DistanceWeights& w, const AlignOptions& opts = {}) {
    if (opts.n_init < 1) throw InputError("alignment_distance: n_init must be >= 1");
    const detail::AlignProblem prob = detail::prepare(t1, t2, w);
    const Eigen::Index n = t1.order();
    std::mt19937_64 rng(opts.seed);

    std::vector<Matrix> starts;
    if (opts.include_canonical_inits) {
        starts.push_back(Matrix::Identity(n, n));
        Matrix D = Matrix::Identity(n, n);
        D(n - 1, n - 1) = -1.0;
        starts.push_back(D);
    }
    for (int det_sign : {1, -1}) {
        Matrix best;
        double best_rho = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < opts.n_init; ++i) {
            Matrix Q = detail::random_orthogonal(n, rng, det_sign);
            const double r = detail::rho_at(prob, Q);
            if (r > best_rho) {
                best_rho = r;
                best = std::move(Q);
            }
        }
        starts.push_back(std::move(best));
    }
    for (const Matrix& Q : opts.extra_inits) starts.push_back(Q);

    AlignmentResult best;
    bool have = false;
    for (const Matrix& Q0 : starts) {
        AlignmentResult r = detail::jacobi_core(prob, Q0, opts, rng);
        if (!have || r.dist_sq < best.dist_sq) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

}  // namespace sob

#endif
