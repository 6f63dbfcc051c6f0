// Command line front end: estimation, alignment distances, Frechet means,
// classification, cross-validation, and synthetic data generation for
// histogram-stream system descriptors.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sob/sob.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string kernel = "chi2";
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--kernel", c.kernel, "Kernel function")
        ->check(CLI::IsMember({"chi2"}));
}

struct DistOpts {
    double lambda_a = 0.25;
    double lambda_mu = 0.0;
    int inits = 4;
    double tol = 1e-10;
    int max_sweeps = 100;
};

void add_dist(CLI::App* cmd, DistOpts& d) {
    cmd->add_option("--lambda-a", d.lambda_a, "Weight on the transition term");
    cmd->add_option("--lambda-mu", d.lambda_mu, "Weight on the bias term");
    cmd->add_option("--inits", d.inits, "Random initializations per component");
    cmd->add_option("--tol", d.tol, "Sweep convergence tolerance");
    cmd->add_option("--max-sweeps", d.max_sweeps, "Sweep budget");
}

sob::AlignOptions align_opts(const DistOpts& d, std::uint64_t seed) {
    sob::AlignOptions a;
    a.tol = d.tol;
    a.max_sweeps = d.max_sweeps;
    a.n_init = d.inits;
    a.seed = seed;
    return a;
}

sob::LabeledDataset load_descriptor_manifest(const fs::path& manifest) {
    sob::LabeledDataset ds;
    for (const auto& entry : sob::read_manifest(manifest))
        ds.items.push_back({sob::read_descriptor(entry.path), entry.label});
    return ds;
}

void write_labels_csv(const std::vector<std::string>& true_labels,
                      const std::vector<std::string>& pred_labels, const fs::path& path) {
    std::ostringstream out;
    out << "index,true_label,predicted_label\n";
    for (std::size_t i = 0; i < pred_labels.size(); ++i)
        out << i << "," << true_labels[i] << "," << pred_labels[i] << "\n";
    sob::detail::atomic_write(path, out.str());
}

void write_confusion_csv(const sob::ClassifyResult& res, const fs::path& path) {
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto& c : res.classes) out << "," << c;
    out << "\n";
    for (Eigen::Index i = 0; i < res.confusion.rows(); ++i) {
        out << res.classes[std::size_t(i)];
        for (Eigen::Index j = 0; j < res.confusion.cols(); ++j)
            out << "," << res.confusion(i, j);
        out << "\n";
    }
    sob::detail::atomic_write(path, out.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Histogram-stream dynamic system toolkit"};
    app.require_subcommand(1);

    // --- estimate ---
    auto* c_est = app.add_subcommand("estimate", "Fit a system descriptor to a stream CSV");
    CommonOpts est_common;
    add_common(c_est, est_common);
    std::string est_input, est_output;
    int est_order = 1;
    double est_margin = 1e-4;
    c_est->add_option("--input", est_input, "Stream CSV")->required();
    c_est->add_option("--order", est_order, "State dimension")->required();
    c_est->add_option("--output", est_output, "Descriptor JSON")->required();
    c_est->add_option("--stability-margin", est_margin, "Spectral norm margin");

    // --- dist ---
    auto* c_dist = app.add_subcommand("dist", "Alignment distance between two descriptors");
    CommonOpts dist_common;
    DistOpts dist_d;
    add_common(c_dist, dist_common);
    add_dist(c_dist, dist_d);
    std::string dist_a, dist_b;
    c_dist->add_option("--a", dist_a, "First descriptor JSON")->required();
    c_dist->add_option("--b", dist_b, "Second descriptor JSON")->required();

    // --- distmat ---
    auto* c_dm = app.add_subcommand("distmat", "Pairwise distance matrix over a manifest");
    CommonOpts dm_common;
    DistOpts dm_d;
    add_common(c_dm, dm_common);
    add_dist(c_dm, dm_d);
    std::string dm_manifest, dm_output;
    c_dm->add_option("--manifest", dm_manifest, "Descriptor manifest JSON")->required();
    c_dm->add_option("--output", dm_output, "Output CSV")->required();

    // --- mean ---
    auto* c_mean = app.add_subcommand("mean", "Frechet mean of a descriptor set");
    CommonOpts mean_common;
    DistOpts mean_d;
    add_common(c_mean, mean_common);
    add_dist(c_mean, mean_d);
    std::string mean_manifest, mean_output, mean_trace;
    long mean_landmarks = 0;
    c_mean->add_option("--manifest", mean_manifest, "Descriptor manifest JSON")->required();
    c_mean->add_option("--landmarks", mean_landmarks, "Landmark count (0 = full concatenation)");
    c_mean->add_option("--output", mean_output, "Mean descriptor JSON")->required();
    c_mean->add_option("--trace", mean_trace, "Cost trace CSV");

    // --- classify ---
    auto* c_cls = app.add_subcommand("classify", "1-NN or nearest-class-center classification");
    CommonOpts cls_common;
    DistOpts cls_d;
    add_common(c_cls, cls_common);
    add_dist(c_cls, cls_d);
    std::string cls_train, cls_test, cls_mode = "nn", cls_center = "frechet";
    std::string cls_labels, cls_confusion;
    bool cls_exclude_self = false;
    long cls_landmarks = 0;
    c_cls->add_option("--train", cls_train, "Training manifest")->required();
    c_cls->add_option("--test", cls_test, "Test manifest")->required();
    c_cls->add_option("--mode", cls_mode, "nn or ncc")->check(CLI::IsMember({"nn", "ncc"}));
    c_cls->add_option("--center", cls_center, "Class center for ncc")
        ->check(CLI::IsMember({"frechet", "medoid"}));
    c_cls->add_flag("--exclude-self", cls_exclude_self,
                    "Leave-one-out: skip the matching index when train == test");
    c_cls->add_option("--landmarks", cls_landmarks, "Landmark count for Frechet centers");
    c_cls->add_option("--labels", cls_labels, "Predicted labels CSV");
    c_cls->add_option("--confusion", cls_confusion, "Confusion matrix CSV");

    // --- cv ---
    auto* c_cv = app.add_subcommand("cv", "Cross-validated grid search over distance weights");
    CommonOpts cv_common;
    DistOpts cv_d;
    add_common(c_cv, cv_common);
    cv_d.lambda_a = 0.25;
    c_cv->add_option("--inits", cv_d.inits, "Random initializations per component");
    c_cv->add_option("--tol", cv_d.tol, "Sweep convergence tolerance");
    c_cv->add_option("--max-sweeps", cv_d.max_sweeps, "Sweep budget");
    std::string cv_train, cv_output;
    int cv_folds = 2;
    std::vector<double> cv_la{0.25}, cv_lmu{0.0};
    c_cv->add_option("--train", cv_train, "Training manifest")->required();
    c_cv->add_option("--folds", cv_folds, "Number of folds");
    c_cv->add_option("--lambda-a-grid", cv_la, "Transition weight grid")->expected(-1);
    c_cv->add_option("--lambda-mu-grid", cv_lmu, "Bias weight grid")->expected(-1);
    c_cv->add_option("--output", cv_output, "Accuracy table CSV");

    // --- synth ---
    auto* c_syn = app.add_subcommand("synth", "Generate a labeled synthetic stream dataset");
    CommonOpts syn_common;
    add_common(c_syn, syn_common);
    sob::SynthSpec syn_spec;
    std::string syn_outdir;
    c_syn->add_option("--classes", syn_spec.n_classes, "Number of classes");
    c_syn->add_option("--per-class", syn_spec.per_class, "Streams per class");
    c_syn->add_option("--bins", syn_spec.p, "Histogram dimension");
    c_syn->add_option("--length", syn_spec.N, "Stream length");
    c_syn->add_option("--order", syn_spec.n, "Latent state dimension");
    c_syn->add_option("--noise", syn_spec.within_class_noise, "Within-class noise scale");
    c_syn->add_option("--separation", syn_spec.between_class_separation,
                      "Between-class separation scale");
    c_syn->add_option("--outdir", syn_outdir, "Output directory")->required();

    // --- validate ---
    auto* c_val = app.add_subcommand("validate", "Check descriptor invariants");
    CommonOpts val_common;
    add_common(c_val, val_common);
    std::string val_input;
    c_val->add_option("--input", val_input, "Descriptor JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_est->parsed()) {
            sob::EstimationOptions opts;
            opts.n = est_order;
            opts.stability_margin = est_margin;
            const sob::KldsDescriptor theta = sob::estimate(sob::read_stream(est_input), opts);
            sob::write_descriptor(theta, est_output);
            std::cout << "wrote " << est_output << " (n=" << theta.order()
                      << ", p=" << theta.dim() << ", N=" << theta.samples() << ")\n";
        } else if (c_dist->parsed()) {
            const sob::KldsDescriptor a = sob::read_descriptor(dist_a);
            const sob::KldsDescriptor b = sob::read_descriptor(dist_b);
            const sob::DistanceWeights w{dist_d.lambda_a, dist_d.lambda_mu};
            const sob::AlignmentResult r =
                sob::alignment_distance(a, b, w, align_opts(dist_d, dist_common.seed));
            std::printf("dist_sq %.17g\nsweeps %d\ndet_sign %d\n", r.dist_sq, r.sweeps,
                        r.det_sign);
        } else if (c_dm->parsed()) {
            const sob::LabeledDataset ds = load_descriptor_manifest(dm_manifest);
            const sob::DistanceWeights w{dm_d.lambda_a, dm_d.lambda_mu};
            const sob::Matrix D =
                sob::distance_matrix(ds, ds, w, align_opts(dm_d, dm_common.seed));
            sob::write_matrix_csv(D, dm_output);
            std::cout << "wrote " << dm_output << " (" << D.rows() << "x" << D.cols() << ")\n";
        } else if (c_mean->parsed()) {
            const sob::LabeledDataset ds = load_descriptor_manifest(mean_manifest);
            std::vector<sob::KldsDescriptor> set;
            for (const auto& it : ds.items) set.push_back(it.theta);
            const sob::DistanceWeights w{mean_d.lambda_a, mean_d.lambda_mu};
            sob::MeanOptions mopts;
            mopts.n_bar = mean_landmarks;
            mopts.seed = mean_common.seed;
            const sob::FrechetResult r =
                sob::frechet_mean(set, w, mopts, align_opts(mean_d, mean_common.seed));
            sob::write_descriptor(r.mean, mean_output);
            if (!mean_trace.empty()) {
                sob::Matrix trace(long(r.cost_trace.size()), 1);
                for (std::size_t i = 0; i < r.cost_trace.size(); ++i)
                    trace(long(i), 0) = r.cost_trace[i];
                sob::write_matrix_csv(trace, mean_trace);
            }
            std::printf("final_cost %.17g\nouter_iterations %zu\nconverged %d\n",
                        r.cost_trace.back(), r.cost_trace.size(), int(r.converged));
        } else if (c_cls->parsed()) {
            const sob::LabeledDataset train = load_descriptor_manifest(cls_train);
            const sob::LabeledDataset test = load_descriptor_manifest(cls_test);
            const sob::DistanceWeights w{cls_d.lambda_a, cls_d.lambda_mu};
            const sob::AlignOptions aopts = align_opts(cls_d, cls_common.seed);
            sob::ClassifyResult res;
            std::vector<std::string> true_labels;
            for (const auto& it : test.items) true_labels.push_back(it.label);
            if (cls_mode == "nn") {
                if (cls_exclude_self) {
                    if (train.items.size() != test.items.size())
                        throw sob::InputError(
                            "classify: --exclude-self needs train and test of equal size");
                    const sob::Matrix D = sob::distance_matrix(test, train, w, aopts);
                    std::vector<std::string> train_labels;
                    for (const auto& it : train.items) train_labels.push_back(it.label);
                    res = sob::detail::summarize(
                        true_labels, sob::nn_from_matrix(D, train_labels, /*exclude_self=*/true));
                } else {
                    res = sob::nn_classify(train, test, w, aopts);
                }
            } else {
                sob::MeanOptions mopts;
                mopts.n_bar = cls_landmarks;
                mopts.seed = cls_common.seed;
                const sob::CenterKind kind = cls_center == "frechet"
                                                 ? sob::CenterKind::FrechetMean
                                                 : sob::CenterKind::Medoid;
                const sob::ClassModel model = sob::ncc_train(train, w, mopts, aopts, kind);
                res = sob::ncc_classify(model, test, w, aopts);
            }
            if (!cls_labels.empty()) write_labels_csv(true_labels, res.labels, cls_labels);
            if (!cls_confusion.empty()) write_confusion_csv(res, cls_confusion);
            std::printf("accuracy %.17g\n", res.accuracy);
        } else if (c_cv->parsed()) {
            const sob::LabeledDataset train = load_descriptor_manifest(cv_train);
            const sob::GridSearchResult r = sob::grid_search_lambda(
                train, cv_folds, cv_la, cv_lmu, align_opts(cv_d, cv_common.seed), cv_common.seed);
            std::ostringstream table;
            table << "lambda_a,lambda_mu,accuracy\n";
            for (const auto& row : r.table)
                table << sob::detail::fmt17(row.lambda_A) << ","
                      << sob::detail::fmt17(row.lambda_mu) << ","
                      << sob::detail::fmt17(row.accuracy) << "\n";
            if (!cv_output.empty()) sob::detail::atomic_write(cv_output, table.str());
            std::printf("best_lambda_a %.17g\nbest_lambda_mu %.17g\n", r.best.lambda_A,
                        r.best.lambda_mu);
        } else if (c_syn->parsed()) {
            syn_spec.seed = syn_common.seed;
            const auto streams = sob::synth_dataset(syn_spec);
            fs::create_directories(syn_outdir);
            std::vector<sob::ManifestEntry> entries;
            for (std::size_t i = 0; i < streams.size(); ++i) {
                const fs::path file =
                    fs::path(syn_outdir) / ("stream_" + std::to_string(i) + ".csv");
                sob::write_stream(streams[i].stream, file);
                entries.push_back({file.filename(), streams[i].label});
            }
            sob::write_manifest(entries, fs::path(syn_outdir) / "manifest.json");
            std::cout << "wrote " << streams.size() << " streams to " << syn_outdir << "\n";
        } else if (c_val->parsed()) {
            const sob::KldsDescriptor theta = sob::read_descriptor(val_input);
            const sob::ValidationReport rep = sob::validate(theta);
            std::printf("orth_residual %.6g (%s)\n", rep.orth_residual,
                        rep.orth_ok ? "ok" : "FAIL");
            std::printf("spectral_norm_A %.6g (%s)\n", rep.spectral_norm_A,
                        rep.stable_ok ? "ok" : "FAIL");
            std::printf("histograms %s\n", rep.histograms_ok ? "ok" : "FAIL");
            if (!rep.pass()) return 1;
        }
    } catch (const sob::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sob::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
