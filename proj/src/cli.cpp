#include "ssd/cli.hpp"

#include <charconv>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "ssd/detector.hpp"
#include "ssd/io.hpp"
#include "ssd/losses.hpp"
#include "ssd/metrics.hpp"
#include "ssd/model_io.hpp"

namespace ssd {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        double v = 0.0;
        const auto res = std::from_chars(text.data() + pos, text.data() + comma, v);
        if (res.ec != std::errc{} || res.ptr != text.data() + comma)
            throw std::invalid_argument("cannot parse '" + text.substr(pos, comma - pos) +
                                        "' as a number");
        out.push_back(v);
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_double_list(text)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw std::invalid_argument("expected a non-negative integer, got " + fmt(v));
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void check_dim(const DetectorModel& model, const Matrix& x, const std::string& what) {
    if (x.cols != model.d)
        throw std::runtime_error(what + ": dimension mismatch: model expects d=" +
                                 std::to_string(model.d) + ", features have d=" +
                                 std::to_string(x.cols));
}

Matrix head_rows(const Matrix& m, std::size_t k) {
    Matrix out(k, m.cols);
    std::copy(m.data.begin(), m.data.begin() + static_cast<std::ptrdiff_t>(k * m.cols),
              out.data.begin());
    return out;
}

std::string score_tsv(const std::vector<double>& scores) {
    std::string out;
    for (std::size_t i = 0; i < scores.size(); ++i)
        out += std::to_string(i) + "\t" + fmt(scores[i]) + "\n";
    return out;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        atomic_write_file(out_path, text);
}

std::vector<double> parse_score_tsv(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<double> scores;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        ++line_no;
        std::size_t end = eol;
        if (end > pos && text[end - 1] == '\r') --end;
        std::size_t start = pos;
        pos = eol + 1;
        if (start == end) continue;
        if (text[start] == '#') continue;
        std::size_t tab = text.rfind('\t', end - 1);
        if (tab == std::string::npos || tab < start) tab = start - 1;
        double v = 0.0;
        const auto res = std::from_chars(text.data() + tab + 1, text.data() + end, v);
        if (res.ec != std::errc{} || res.ptr != text.data() + end)
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": cannot parse score");
        scores.push_back(v);
    }
    return scores;
}

struct SynthArgs {
    SynthSpec spec;
    std::vector<std::string> means_raw;
    std::string cov_raw, shift_raw;
    std::string format = "binary";
    std::string out, labels_out;
};

SynthSpec finish_spec(SynthArgs& a) {
    for (const auto& s : a.means_raw) a.spec.means.push_back(parse_double_list(s));
    if (!a.cov_raw.empty()) a.spec.cov_diag = parse_double_list(a.cov_raw);
    if (!a.shift_raw.empty()) a.spec.shift_dims = parse_index_list(a.shift_raw);
    return a.spec;
}

void add_synth_options(CLI::App* sub, SynthArgs& a) {
    sub->add_option("--kind", a.spec.kind, "gmm | shifted-gmm | blobs2d");
    sub->add_option("--d", a.spec.d, "feature dimension");
    sub->add_option("--components", a.spec.components, "mixture components");
    sub->add_option("--n", a.spec.n, "number of rows");
    sub->add_option("--seed", a.spec.seed, "rng seed");
    sub->add_option("--mean", a.means_raw,
                    "component mean as comma list; repeat per component");
    sub->add_option("--cov-diag", a.cov_raw, "diagonal covariance (1 or d values)");
    sub->add_option("--shift-dims", a.shift_raw, "dims to displace (shifted-gmm)");
    sub->add_option("--shift-mag", a.spec.shift_mag, "displacement magnitude");
}

double detector_auroc(const DetectorModel& model, const Matrix& in_test,
                      const Matrix& ood_test) {
    const auto s_in = score_batch(model, in_test);
    const auto s_ood = score_batch(model, ood_test);
    return auroc(make_labeled(s_in, s_ood));
}

int run(CLI::App& app, const std::vector<std::string>& args) {
    try {
        // CLI11 consumes reversed argv-style vectors
        std::vector<std::string> rargs(args.rbegin(), args.rend());
        app.parse(rargs);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"feature-space outlier detection toolkit"};
    app.require_subcommand(1);

    // ---------------- synth ----------------
    auto synth_args = std::make_shared<SynthArgs>();
    {
        auto* sub = app.add_subcommand("synth", "generate synthetic feature files");
        add_synth_options(sub, *synth_args);
        sub->add_option("--format", synth_args->format, "csv | binary");
        sub->add_option("--out", synth_args->out, "output feature file")->required();
        sub->add_option("--labels-out", synth_args->labels_out,
                        "optional component-label file");
        sub->callback([synth_args] {
            auto& a = *synth_args;
            if (a.format != "csv" && a.format != "binary")
                throw std::invalid_argument("unknown format '" + a.format + "'");
            const GeneratedData data = generate(finish_spec(a));
            save_features(data.features, a.out,
                          a.format == "csv" ? FeatureFormat::csv : FeatureFormat::binary);
            if (!a.labels_out.empty()) {
                std::string text;
                for (std::size_t v : data.labels) text += std::to_string(v) + "\n";
                atomic_write_file(a.labels_out, text);
            }
            std::cout << "wrote " << data.features.rows << "x" << data.features.cols
                      << " to " << a.out << "\n";
        });
    }

    // ---------------- fit ----------------
    struct FitArgs {
        std::string in, out;
        RunConfig cfg;
        bool no_normalize = false;
    };
    auto fit_args = std::make_shared<FitArgs>();
    {
        auto* sub = app.add_subcommand("fit", "fit a cluster-conditioned detector");
        sub->add_option("--in", fit_args->in, "in-distribution feature file")->required();
        sub->add_option("--out", fit_args->out, "model output path")->required();
        sub->add_option("--clusters", fit_args->cfg.clusters, "number of clusters m");
        sub->add_option("--seed", fit_args->cfg.seed, "rng seed");
        sub->add_option("--split", fit_args->cfg.split,
                        "train fraction; the rest is reserved for calibration");
        sub->add_flag("--no-normalize", fit_args->no_normalize, "skip l2 normalization");
        sub->callback([fit_args] {
            auto& a = *fit_args;
            validate(a.cfg);
            const Matrix features = load_features(a.in);
            const SplitResult parts = partition(features, a.cfg.split, a.cfg.seed);
            const DetectorModel model =
                fit(parts.train, a.cfg.clusters, a.cfg.seed, !a.no_normalize);
            save_model(model, a.out);
            std::cout << "model written to " << a.out << " (m=" << model.m
                      << ", d=" << model.d << ", n_train=" << parts.train.rows << ")\n";
        });
    }

    // ---------------- calibrate ----------------
    struct CalArgs {
        std::string model, cal, in, out;
        double split = 0.9, tpr = 0.95;
    };
    auto cal_args = std::make_shared<CalArgs>();
    {
        auto* sub = app.add_subcommand("calibrate", "pick the score threshold at a TPR");
        sub->add_option("--model", cal_args->model, "model file")->required();
        sub->add_option("--cal", cal_args->cal, "explicit calibration feature file");
        sub->add_option("--in", cal_args->in,
                        "full in-distribution file; calibration half of the fit split");
        sub->add_option("--split", cal_args->split, "split used at fit time");
        sub->add_option("--tpr", cal_args->tpr, "target true-positive rate");
        sub->add_option("--out", cal_args->out, "calibration output path")->required();
        sub->callback([cal_args] {
            auto& a = *cal_args;
            const DetectorModel model = load_model(a.model);
            Matrix cal_features;
            if (!a.cal.empty()) {
                cal_features = load_features(a.cal);
            } else if (!a.in.empty()) {
                cal_features =
                    partition(load_features(a.in), a.split, model.fit_seed).cal;
            } else {
                throw std::invalid_argument("calibrate needs --cal or --in");
            }
            check_dim(model, cal_features, "calibrate");
            const auto scores = score_batch(model, cal_features);
            const Calibration cal = calibrate(scores, a.tpr);
            save_calibration(cal, a.out);
            std::cout << "threshold " << fmt(cal.threshold) << " at tpr "
                      << fmt(cal.target_tpr) << " from " << cal.cal_count
                      << " calibration scores -> " << a.out << "\n";
        });
    }

    // ---------------- score ----------------
    struct ScoreArgs {
        std::string model, in, out;
    };
    auto score_args = std::make_shared<ScoreArgs>();
    {
        auto* sub = app.add_subcommand("score", "per-row outlier scores as TSV");
        sub->add_option("--model", score_args->model, "model file")->required();
        sub->add_option("--in", score_args->in, "feature file")->required();
        sub->add_option("--out", score_args->out, "output TSV (default stdout)");
        sub->callback([score_args] {
            auto& a = *score_args;
            const DetectorModel model = load_model(a.model);
            const Matrix features = load_features(a.in);
            check_dim(model, features, "score");
            emit(a.out, score_tsv(score_batch(model, features)));
        });
    }

    // ---------------- classify ----------------
    struct ClassifyArgs {
        std::string scores, calibration, out;
    };
    auto classify_args = std::make_shared<ClassifyArgs>();
    {
        auto* sub = app.add_subcommand("classify", "threshold scores into outlier flags");
        sub->add_option("--scores", classify_args->scores, "score TSV from `score`")
            ->required();
        sub->add_option("--calibration", classify_args->calibration, "calibration file")
            ->required();
        sub->add_option("--out", classify_args->out, "output TSV (default stdout)");
        sub->callback([classify_args] {
            auto& a = *classify_args;
            const auto scores = parse_score_tsv(a.scores);
            const Calibration cal = load_calibration(a.calibration);
            const auto flags = classify(scores, cal);
            std::string text;
            for (std::size_t i = 0; i < flags.size(); ++i)
                text += std::to_string(i) + "\t" + (flags[i] ? "1" : "0") + "\n";
            emit(a.out, text);
        });
    }

    // ---------------- evaluate ----------------
    struct EvalArgs {
        std::string model, in, ood, out;
        double tpr = 0.95;
    };
    auto eval_args = std::make_shared<EvalArgs>();
    {
        auto* sub = app.add_subcommand("evaluate", "AUROC / AUPR / FPR@TPR report");
        sub->add_option("--model", eval_args->model, "model file")->required();
        sub->add_option("--in", eval_args->in, "in-distribution test features")->required();
        sub->add_option("--ood", eval_args->ood, "out-of-distribution test features")
            ->required();
        sub->add_option("--tpr", eval_args->tpr, "TPR operating point");
        sub->add_option("--out", eval_args->out, "optional TSV output path");
        sub->callback([eval_args] {
            auto& a = *eval_args;
            const DetectorModel model = load_model(a.model);
            const Matrix in_test = load_features(a.in);
            const Matrix ood_test = load_features(a.ood);
            check_dim(model, in_test, "evaluate --in");
            check_dim(model, ood_test, "evaluate --ood");
            const auto s_in = score_batch(model, in_test);
            const auto s_ood = score_batch(model, ood_test);
            const EvalReport r = evaluate_scores(s_in, s_ood, a.tpr);
            std::cout << "auroc      " << fmt(r.auroc) << "\n"
                      << "aupr       " << fmt(r.aupr) << "\n"
                      << "fpr@tpr=" << fmt(r.tpr_target) << "  " << fmt(r.fpr_at_tpr)
                      << "\n"
                      << "n_in " << r.n_in << ", n_ood " << r.n_ood << "\n";
            const std::string tsv = eval_report_tsv_header() + "\n" +
                                    eval_report_tsv_line(r) + "\n";
            std::cout << tsv;
            if (!a.out.empty()) atomic_write_file(a.out, tsv);
        });
    }

    // ---------------- fewshot ----------------
    struct FewshotArgs {
        std::string in, shots, out, test_in, test_ood;
        RunConfig cfg;
        bool no_shrinkage = false, no_normalize = false;
    };
    auto fs_args = std::make_shared<FewshotArgs>();
    {
        auto* sub = app.add_subcommand("fewshot", "fit a few-shot detector from k shots");
        sub->add_option("--in", fs_args->in, "in-distribution feature file")->required();
        sub->add_option("--shots", fs_args->shots, "known-outlier feature file")->required();
        sub->add_option("--out", fs_args->out, "few-shot model output path")->required();
        sub->add_option("--k", fs_args->cfg.k, "number of shots to use");
        sub->add_option("--augment", fs_args->cfg.n_augment, "copies per shot");
        sub->add_option("--jitter", fs_args->cfg.jitter_scale,
                        "augmentation noise scale (fraction of per-dim std)");
        sub->add_option("--seed", fs_args->cfg.seed, "rng seed");
        sub->add_option("--test-in", fs_args->test_in, "optional in test features");
        sub->add_option("--test-ood", fs_args->test_ood, "optional ood test features");
        sub->add_flag("--no-shrinkage", fs_args->no_shrinkage,
                      "plain sample covariance for the outlier set");
        sub->add_flag("--no-normalize", fs_args->no_normalize, "skip l2 normalization");
        sub->callback([fs_args] {
            auto& a = *fs_args;
            validate(a.cfg);
            const Matrix in_features = load_features(a.in);
            const Matrix shots = load_features(a.shots);
            if (shots.rows < a.cfg.k)
                throw std::runtime_error("need at least k=" + std::to_string(a.cfg.k) +
                                         " shots, file has " + std::to_string(shots.rows));
            // shots must live in the space the model scores in
            Matrix shot_rows = head_rows(shots, a.cfg.k);
            if (!a.no_normalize) shot_rows = l2_normalize_rows(shot_rows).features;
            const FewShotModel model =
                fewshot_fit(in_features, shot_rows, a.cfg.n_augment,
                            a.cfg.jitter_scale, a.cfg.seed, !a.no_normalize,
                            !a.no_shrinkage);
            save_fewshot(model, a.out);
            std::cout << "few-shot model written to " << a.out << " (k=" << model.k
                      << ", n_augment=" << model.n_augment << ")\n";
            if (!a.test_in.empty() || !a.test_ood.empty()) {
                if (a.test_in.empty() || a.test_ood.empty())
                    throw std::invalid_argument("--test-in and --test-ood come together");
                const Matrix in_test = load_features(a.test_in);
                const Matrix ood_test = load_features(a.test_ood);
                check_dim(model.in_model, in_test, "fewshot --test-in");
                check_dim(model.in_model, ood_test, "fewshot --test-ood");
                const double base = detector_auroc(model.in_model, in_test, ood_test);
                const double with_shots =
                    auroc(make_labeled(ssd_k_score_batch(model, in_test),
                                       ssd_k_score_batch(model, ood_test)));
                std::cout << "k\tn_augment\tauroc_ssd\tauroc_ssd_k\tgap\n"
                          << model.k << "\t" << model.n_augment << "\t" << fmt(base)
                          << "\t" << fmt(with_shots) << "\t" << fmt(with_shots - base)
                          << "\n";
            }
        });
    }

    // ---------------- eigen-report ----------------
    struct EigenArgs {
        std::string model, in, ood, out;
    };
    auto eig_args = std::make_shared<EigenArgs>();
    {
        auto* sub = app.add_subcommand("eigen-report",
                                       "per-eigenvector discrimination table");
        sub->add_option("--model", eig_args->model, "model file (m=1)")->required();
        sub->add_option("--in", eig_args->in, "in test features")->required();
        sub->add_option("--ood", eig_args->ood, "ood test features")->required();
        sub->add_option("--out", eig_args->out, "output TSV (default stdout)");
        sub->callback([eig_args] {
            auto& a = *eig_args;
            const DetectorModel model = load_model(a.model);
            const Matrix in_test = load_features(a.in);
            const Matrix ood_test = load_features(a.ood);
            check_dim(model, in_test, "eigen-report --in");
            check_dim(model, ood_test, "eigen-report --ood");
            const EigenReport report =
                eigen_discrimination_report(model, in_test, ood_test);
            std::string text = "index\teigenvalue\tauroc\n";
            for (const auto& row : report.rows)
                text += std::to_string(row.index) + "\t" + fmt(row.eigenvalue) + "\t" +
                        fmt(row.auroc) + "\n";
            text += "# unscaled aggregate (euclidean): auroc=" +
                    fmt(report.auroc_euclid) + "\n";
            text += "# eigenvalue-scaled aggregate (mahalanobis): auroc=" +
                    fmt(report.auroc_maha) + "\n";
            emit(a.out, text);
        });
    }

    // ---------------- train-toy ----------------
    struct ToyArgs {
        std::size_t d = 8, p = 2, n = 60, steps = 300;
        double lr = 0.1, tau = 1.0, jitter = 0.2, init_scale = 1.2;
        double offset = 6.0, separation = 4.0, noise = 1.0;
        std::uint64_t seed = 0;
        bool supervised = false;
        std::string encoder_out, trace_out;
    };
    auto toy_args = std::make_shared<ToyArgs>();
    {
        auto* sub = app.add_subcommand(
            "train-toy", "contrastive training on two synthetic blobs");
        sub->add_option("--d", toy_args->d, "input dimension");
        sub->add_option("--p", toy_args->p, "projection dimension");
        sub->add_option("--n", toy_args->n, "points per class");
        sub->add_option("--steps", toy_args->steps, "gradient steps");
        sub->add_option("--lr", toy_args->lr, "learning rate");
        sub->add_option("--tau", toy_args->tau, "softmax temperature");
        sub->add_option("--jitter", toy_args->jitter, "view noise std (absolute)");
        sub->add_option("--init-scale", toy_args->init_scale, "weight init std");
        sub->add_option("--offset", toy_args->offset, "common mean offset on dim 0");
        sub->add_option("--separation", toy_args->separation,
                        "class mean separation on dim 1");
        sub->add_option("--noise", toy_args->noise, "blob noise std");
        sub->add_option("--seed", toy_args->seed, "rng seed");
        sub->add_flag("--supervised", toy_args->supervised,
                      "use labels (supervised contrastive)");
        sub->add_option("--encoder-out", toy_args->encoder_out, "encoder output path");
        sub->add_option("--trace-out", toy_args->trace_out, "loss trace TSV path");
        sub->callback([toy_args] {
            auto& a = *toy_args;
            if (a.d < 2) throw std::invalid_argument("train-toy needs d >= 2");
            SynthSpec spec;
            spec.kind = "blobs2d";
            spec.d = a.d;
            spec.components = 2;
            spec.n = 2 * a.n;
            spec.seed = a.seed;
            spec.cov_diag = {a.noise * a.noise};
            spec.means.assign(2, std::vector<double>(a.d, 0.0));
            spec.means[0][0] = a.offset;
            spec.means[1][0] = a.offset;
            spec.means[1][1] = a.separation;
            const GeneratedData data = generate(spec);

            std::optional<std::vector<long long>> labels;
            if (a.supervised) {
                labels.emplace(data.labels.size());
                for (std::size_t i = 0; i < data.labels.size(); ++i)
                    (*labels)[i] = static_cast<long long>(data.labels[i]);
            }
            const ToyEncoder enc0 =
                make_toy_encoder(a.d, a.p, a.seed + 1, a.init_scale);
            const TrainResult result =
                train_toy(data.features, JitterSpec{a.jitter}, enc0, a.steps, a.lr,
                          a.seed + 2, labels, a.tau);

            Matrix cls_a(a.n, a.d), cls_b(a.n, a.d);
            std::size_t ia = 0, ib = 0;
            for (std::size_t i = 0; i < data.features.rows; ++i) {
                auto src = data.features.row(i);
                auto dst = data.labels[i] == 0 ? cls_a.row(ia++) : cls_b.row(ib++);
                std::copy(src.begin(), src.end(), dst.begin());
            }
            auto embed_auroc = [&](const ToyEncoder& enc) {
                const Matrix ua = encode(enc, cls_a);
                const Matrix ub = encode(enc, cls_b);
                const DetectorModel m = fit(ua, 1, a.seed + 3);
                return detector_auroc(m, ua, ub);
            };
            const double auroc_random = embed_auroc(enc0);
            const double auroc_trained = embed_auroc(result.encoder);
            std::cout << "loss_initial\tloss_final\tauroc_random\tauroc_trained\tgain\n"
                      << fmt(result.loss_trace.front()) << "\t"
                      << fmt(result.loss_trace.back()) << "\t" << fmt(auroc_random)
                      << "\t" << fmt(auroc_trained) << "\t"
                      << fmt(auroc_trained - auroc_random) << "\n";
            if (!a.encoder_out.empty()) save_toy_encoder(result.encoder, a.encoder_out);
            if (!a.trace_out.empty()) {
                std::string text = "step\tloss\n";
                for (std::size_t s = 0; s < result.loss_trace.size(); ++s)
                    text += std::to_string(s) + "\t" + fmt(result.loss_trace[s]) + "\n";
                atomic_write_file(a.trace_out, text);
            }
        });
    }

    // ---------------- sweep-clusters ----------------
    struct SweepClustersArgs {
        std::string in, test_in, ood, out, clusters = "1,2,4,8";
        std::uint64_t seed = 0;
        double tpr = 0.95;
    };
    auto sc_args = std::make_shared<SweepClustersArgs>();
    {
        auto* sub = app.add_subcommand("sweep-clusters",
                                       "detector quality as m varies");
        sub->add_option("--in", sc_args->in, "training features")->required();
        sub->add_option("--test-in", sc_args->test_in, "in test features")->required();
        sub->add_option("--ood", sc_args->ood, "ood test features")->required();
        sub->add_option("--clusters", sc_args->clusters, "comma list of m values");
        sub->add_option("--seed", sc_args->seed, "rng seed");
        sub->add_option("--tpr", sc_args->tpr, "TPR operating point");
        sub->add_option("--out", sc_args->out, "output TSV (default stdout)");
        sub->callback([sc_args] {
            auto& a = *sc_args;
            const Matrix train = load_features(a.in);
            const Matrix in_test = load_features(a.test_in);
            const Matrix ood_test = load_features(a.ood);
            std::string text = "m\tauroc\taupr\tfpr_at_tpr\n";
            for (std::size_t m : parse_index_list(a.clusters)) {
                if (m < 1) throw std::invalid_argument("cluster counts must be >= 1");
                const DetectorModel model = fit(train, m, a.seed);
                check_dim(model, in_test, "sweep-clusters --test-in");
                check_dim(model, ood_test, "sweep-clusters --ood");
                const EvalReport r = evaluate_scores(score_batch(model, in_test),
                                                     score_batch(model, ood_test), a.tpr);
                text += std::to_string(m) + "\t" + fmt(r.auroc) + "\t" + fmt(r.aupr) +
                        "\t" + fmt(r.fpr_at_tpr) + "\n";
            }
            emit(a.out, text);
        });
    }

    // ---------------- sweep-augment ----------------
    struct SweepAugmentArgs {
        std::string in, shots, test_in, ood, out, augment = "1,2,5,10,20";
        std::size_t k = 5;
        double jitter = 0.1;
        std::uint64_t seed = 0;
        bool no_shrinkage = false;
    };
    auto sa_args = std::make_shared<SweepAugmentArgs>();
    {
        auto* sub = app.add_subcommand("sweep-augment",
                                       "few-shot quality as n_augment varies");
        sub->add_option("--in", sa_args->in, "in-distribution features")->required();
        sub->add_option("--shots", sa_args->shots, "known-outlier feature file")
            ->required();
        sub->add_option("--test-in", sa_args->test_in, "in test features")->required();
        sub->add_option("--ood", sa_args->ood, "ood test features")->required();
        sub->add_option("--k", sa_args->k, "number of shots");
        sub->add_option("--augment", sa_args->augment, "comma list of n_augment values");
        sub->add_option("--jitter", sa_args->jitter, "augmentation noise scale");
        sub->add_option("--seed", sa_args->seed, "rng seed");
        sub->add_flag("--no-shrinkage", sa_args->no_shrinkage,
                      "plain sample covariance for the outlier set");
        sub->add_option("--out", sa_args->out, "output TSV (default stdout)");
        sub->callback([sa_args] {
            auto& a = *sa_args;
            const Matrix in_features = load_features(a.in);
            const Matrix shots = load_features(a.shots);
            if (shots.rows < a.k)
                throw std::runtime_error("need at least k=" + std::to_string(a.k) +
                                         " shots, file has " + std::to_string(shots.rows));
            const Matrix in_test = load_features(a.test_in);
            const Matrix ood_test = load_features(a.ood);
            const DetectorModel base = fit(in_features, 1, a.seed);
            check_dim(base, in_test, "sweep-augment --test-in");
            check_dim(base, ood_test, "sweep-augment --ood");
            const double base_auroc = detector_auroc(base, in_test, ood_test);
            const Matrix shot_rows = l2_normalize_rows(head_rows(shots, a.k)).features;
            std::string text = "n_augment\tauroc_ssd_k\tauroc_ssd\tgap\n";
            for (std::size_t na : parse_index_list(a.augment)) {
                if (na < 1) throw std::invalid_argument("n_augment values must be >= 1");
                const FewShotModel model =
                    fewshot_fit(in_features, shot_rows, na, a.jitter, a.seed,
                                true, !a.no_shrinkage);
                const double v = auroc(make_labeled(ssd_k_score_batch(model, in_test),
                                                    ssd_k_score_batch(model, ood_test)));
                text += std::to_string(na) + "\t" + fmt(v) + "\t" + fmt(base_auroc) +
                        "\t" + fmt(v - base_auroc) + "\n";
            }
            emit(a.out, text);
        });
    }

    return run(app, args);
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

}  // namespace ssd
