#ifndef SOB_CLASSIFY_HPP
#define SOB_CLASSIFY_HPP

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sob/align.hpp"
#include "sob/frechet.hpp"

namespace sob {

struct LabeledItem {
    KldsDescriptor theta;
    std::string label;
};

struct LabeledDataset {
    std::vector<LabeledItem> items;
    std::string metadata;
};

enum class CenterKind { FrechetMean, Medoid };

struct ClassModel {
    std::vector<std::pair<std::string, KldsDescriptor>> centers;  // sorted by class name
    CenterKind center_kind = CenterKind::FrechetMean;
};

struct ClassifyResult {
    std::vector<std::string> labels;          // predicted, per test item
    double accuracy = 0.0;
    std::vector<std::string> classes;         // sorted class names
    Matrix confusion;                         // rows: true class, cols: predicted
};

namespace detail {

inline void check_dataset(const LabeledDataset& ds, const char* what) {
    if (ds.items.empty()) throw InputError(std::string(what) + ": empty dataset");
    const Eigen::Index n = ds.items.front().theta.order();
    const Eigen::Index p = ds.items.front().theta.dim();
    for (const auto& it : ds.items)
        if (it.theta.order() != n || it.theta.dim() != p)
            throw InputError(std::string(what) + ": inconsistent descriptor shapes");
}

inline std::vector<std::string> sorted_classes(const std::vector<std::string>& true_labels,
                                               const std::vector<std::string>& pred_labels) {
    std::vector<std::string> classes(true_labels);
    classes.insert(classes.end(), pred_labels.begin(), pred_labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

inline ClassifyResult summarize(const std::vector<std::string>& true_labels,
                                std::vector<std::string> pred_labels) {
    ClassifyResult res;
    res.classes = sorted_classes(true_labels, pred_labels);
    const auto idx = [&res](const std::string& c) {
        return long(std::lower_bound(res.classes.begin(), res.classes.end(), c) - res.classes.begin());
    };
    res.confusion = Matrix::Zero(long(res.classes.size()), long(res.classes.size()));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        res.confusion(idx(true_labels[i]), idx(pred_labels[i])) += 1.0;
        if (true_labels[i] == pred_labels[i]) ++hits;
    }
    res.accuracy = double(hits) / double(true_labels.size());
    res.labels = std::move(pred_labels);
    return res;
}

}  // namespace detail

/// Pairwise squared alignment distances; the self case fills only the upper
/// triangle and mirrors it.
inline Matrix distance_matrix(const LabeledDataset& set1, const LabeledDataset& set2,
                              const DistanceWeights& w, const AlignOptions& align_opts = {}) {
    detail::check_dataset(set1, "distance_matrix");
    detail::check_dataset(set2, "distance_matrix");
    if (set1.items.front().theta.dim() != set2.items.front().theta.dim() ||
        set1.items.front().theta.order() != set2.items.front().theta.order())
        throw InputError("distance_matrix: incompatible datasets");
    const long R = long(set1.items.size()), C = long(set2.items.size());
    Matrix D(R, C);
    if (&set1 == &set2) {
        for (long i = 0; i < R; ++i) {
            D(i, i) = 0.0;
            for (long j = i + 1; j < C; ++j) {
                D(i, j) = alignment_distance(set1.items[std::size_t(i)].theta,
                                             set2.items[std::size_t(j)].theta, w, align_opts)
                              .dist_sq;
                D(j, i) = D(i, j);
            }
        }
    } else {
        for (long i = 0; i < R; ++i)
            for (long j = 0; j < C; ++j)
                D(i, j) = alignment_distance(set1.items[std::size_t(i)].theta,
                                             set2.items[std::size_t(j)].theta, w, align_opts)
                              .dist_sq;
    }
    return D;
}

/// 1-NN decisions from a precomputed test-by-train distance matrix. With
/// exclude_self, entry (i, i) is skipped (leave-one-out on train == test).
inline std::vector<std::string> nn_from_matrix(const Matrix& D,
                                               const std::vector<std::string>& train_labels,
                                               bool exclude_self = false) {
    std::vector<std::string> pred;
    for (long i = 0; i < D.rows(); ++i) {
        long best = -1;
        for (long j = 0; j < D.cols(); ++j) {
            if (exclude_self && i == j) continue;
            if (best < 0 || D(i, j) < D(i, best)) best = j;
        }
        if (best < 0) throw InputError("nn_from_matrix: no usable training item");
        pred.push_back(train_labels[std::size_t(best)]);
    }
    return pred;
}

inline ClassifyResult nn_classify(const LabeledDataset& train, const LabeledDataset& test,
                                  const DistanceWeights& w, const AlignOptions& align_opts = {}) {
    const Matrix D = distance_matrix(test, train, w, align_opts);
    std::vector<std::string> train_labels, true_labels;
    for (const auto& it : train.items) train_labels.push_back(it.label);
    for (const auto& it : test.items) true_labels.push_back(it.label);
    return detail::summarize(true_labels, nn_from_matrix(D, train_labels));
}

inline ClassModel ncc_train(const LabeledDataset& train, const DistanceWeights& w,
                            const MeanOptions& mean_opts = {}, const AlignOptions& align_opts = {},
                            CenterKind center_kind = CenterKind::FrechetMean) {
    detail::check_dataset(train, "ncc_train");
    std::map<std::string, std::vector<KldsDescriptor>> by_class;
    for (const auto& it : train.items) by_class[it.label].push_back(it.theta);
    ClassModel model;
    model.center_kind = center_kind;
    for (const auto& [label, members] : by_class) {
        if (center_kind == CenterKind::FrechetMean) {
            model.centers.emplace_back(label, frechet_mean(members, w, mean_opts, align_opts).mean);
        } else {
            model.centers.emplace_back(label, members[medoid(members, w, align_opts)]);
        }
    }
    return model;
}

inline ClassifyResult ncc_classify(const ClassModel& model, const LabeledDataset& test,
                                   const DistanceWeights& w, const AlignOptions& align_opts = {}) {
    if (model.centers.empty()) throw InputError("ncc_classify: empty model");
    detail::check_dataset(test, "ncc_classify");
    std::vector<std::string> pred, true_labels;
    for (const auto& it : test.items) {
        true_labels.push_back(it.label);
        std::string best_label;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [label, center] : model.centers) {
            const double d = alignment_distance(center, it.theta, w, align_opts).dist_sq;
            // Centers are iterated in lexicographic order, so strict < breaks
            // ties toward the smaller class name.
            if (d < best) {
                best = d;
                best_label = label;
            }
        }
        pred.push_back(best_label);
    }
    return detail::summarize(true_labels, std::move(pred));
}

struct GridSearchResult {
    DistanceWeights best;
    struct Row {
        double lambda_A, lambda_mu, accuracy;
    };
    std::vector<Row> table;
};

/// Stratified k-fold 1-NN accuracy over a (lambda_A, lambda_mu) grid.
/// Ties resolve toward smaller lambda_A, then smaller lambda_mu.
inline GridSearchResult grid_search_lambda(const LabeledDataset& train, int folds,
                                           const std::vector<double>& lambda_A_grid,
                                           const std::vector<double>& lambda_mu_grid,
                                           const AlignOptions& align_opts, std::uint64_t seed) {
    detail::check_dataset(train, "grid_search_lambda");
    if (folds < 2) throw InputError("grid_search_lambda: need at least 2 folds");
    if (lambda_A_grid.empty() || lambda_mu_grid.empty())
        throw InputError("grid_search_lambda: empty grid");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < train.items.size(); ++i)
        by_class[train.items[i].label].push_back(i);
    for (const auto& [label, idxs] : by_class)
        if (idxs.size() < std::size_t(folds))
            throw InputError("grid_search_lambda: class '" + label + "' has fewer items than folds");

    // Stratified assignment: shuffle within each class, deal round-robin.
    std::mt19937_64 rng(seed);
    std::vector<int> fold_of(train.items.size());
    for (auto& [label, idxs] : by_class) {
        std::shuffle(idxs.begin(), idxs.end(), rng);
        for (std::size_t k = 0; k < idxs.size(); ++k) fold_of[idxs[k]] = int(k % std::size_t(folds));
    }

    GridSearchResult res;
    double best_acc = -1.0;
    for (double la : lambda_A_grid) {
        for (double lm : lambda_mu_grid) {
            const DistanceWeights w{la, lm};
            const Matrix D = distance_matrix(train, train, w, align_opts);
            std::size_t hits = 0, total = 0;
            for (std::size_t i = 0; i < train.items.size(); ++i) {
                long best = -1;
                for (std::size_t j = 0; j < train.items.size(); ++j) {
                    if (fold_of[j] == fold_of[i]) continue;  // test fold excluded from train
                    if (best < 0 || D(long(i), long(j)) < D(long(i), best)) best = long(j);
                }
                if (train.items[std::size_t(best)].label == train.items[i].label) ++hits;
                ++total;
            }
            const double acc = double(hits) / double(total);
            res.table.push_back({la, lm, acc});
            if (acc > best_acc + 1e-15) {
                best_acc = acc;
                res.best = w;
            } else if (std::abs(acc - best_acc) <= 1e-15) {
                if (la < res.best.lambda_A ||
                    (la == res.best.lambda_A && lm < res.best.lambda_mu)) {
                    res.best = w;
                }
            }
        }
    }
    return res;
}

}  // namespace sob

#endif
