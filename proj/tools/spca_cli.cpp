#include "spca/dataset.hpp"
#include "spca/errors.hpp"
#include "spca/evaluation.hpp"
#include "spca/generators.hpp"
#include "spca/model.hpp"
#include "spca/model_io.hpp"
#include "spca/principal_curve.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace spca;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

double parse_q(const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) throw InvalidArgument("--q must be a positive number or 'inf', got '" + s + "'");
    return v;
}

struct PcFlags {
    PcParams pc;
    std::string q = "10";
};

void add_pc_flags(CLI::App* cmd, PcFlags& f) {
    cmd->add_option("--k-frac", f.pc.k_frac, "neighbourhood size as a fraction of N")->capture_default_str();
    cmd->add_option("--tau", f.pc.tau, "step length (0: 0.05 * data scale)")->capture_default_str();
    cmd->add_option("--q", f.q, "stiffness, a positive number or inf")->capture_default_str();
    cmd->add_option("--d-out", f.pc.d_out, "outside-manifold distance (0: 3 * median NN distance)")
        ->capture_default_str();
    cmd->add_option("--cross-tol", f.pc.cross_tol, "curve crossing distance (<0: tau / 2)")->capture_default_str();
    cmd->add_option("--max-vertices", f.pc.max_vertices, "vertices per direction (0: ceil(10 sqrt N))")
        ->capture_default_str();
}

PcParams pc_from(const PcFlags& f) {
    PcParams p = f.pc;
    p.q = parse_q(f.q);
    return p;
}

void add_transform_flags(CLI::App* cmd, TransformOptions& o) {
    cmd->add_option("--tol-frac", o.tol_frac, "residual tolerance as a fraction of the training diameter")
        ->capture_default_str();
    cmd->add_option("--alpha", o.alpha, "initial step factor")->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "refinement iterations")->capture_default_str();
    cmd->add_option("--alpha-growth", o.alpha_growth, "step growth after accepted steps (1: fixed step)")
        ->capture_default_str();
}

CsvOptions csv_opts(bool labeled) {
    CsvOptions o;
    o.labeled = labeled;
    return o;
}

void write_json(const std::string& path, const json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

json transform_options_json(const TransformOptions& o) {
    return {{"tol_frac", o.tol_frac}, {"alpha", o.alpha}, {"max_iter", o.max_iter}, {"alpha_growth", o.alpha_growth}};
}

Dataset matrix_dataset(const Matrix& m) { return Dataset(PointMatrix(m)); }

// ---- gen -------------------------------------------------------------------

struct GenArgs {
    std::string kind;
    Eigen::Index n = 1000;
    std::uint64_t seed = 1;
    double sigma = 0.3;
    double alpha1 = 10.0;
    double alpha2 = 20.0;
    double theta1 = 30.0;
    double ratio1 = 0.83;
    double ratio2 = 1.5;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    Dataset d;
    bool labeled = false;
    if (a.kind == "spiral") {
        d = gen_noisy_spiral(a.n, a.seed);
    } else if (a.kind == "swissroll") {
        d = gen_swiss_roll(a.n, a.sigma, a.seed);
    } else if (a.kind == "twocluster") {
        d = gen_two_cluster(a.alpha1, a.alpha2, a.theta1, {a.ratio1, a.ratio2}, a.n, a.seed);
        labeled = true;
    } else if (a.kind == "curve3d") {
        d = gen_curve3d(a.n, a.seed);
    } else {
        throw InvalidArgument("unknown dataset kind '" + a.kind + "'");
    }
    save_csv(d, a.out, csv_opts(labeled));
    std::printf("N=%ld d=%ld seed=%llu\n", static_cast<long>(d.size()), static_cast<long>(d.dim()),
                static_cast<unsigned long long>(a.seed));
    return 0;
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
    std::string data;
    bool labeled = false;
    PcFlags pc;
    double gamma = 1.0;
    Eigen::Index density_k = 0;
    std::string origin = "mean";
    double rate_bits = 0.0;
    std::string out;
};

int cmd_fit(const FitArgs& a) {
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    SpcaConfig cfg;
    cfg.pc = pc_from(a.pc);
    cfg.metric.gamma = a.gamma;
    cfg.metric.density_k = a.density_k;
    cfg.origin_mode = parse_origin_mode(a.origin);
    cfg.rate_bits = a.rate_bits;
    SpcaModel m = fit(d, cfg);
    save_model(m, a.out);
    std::printf("fitted d=%ld first curve: %zu vertices, length %.6g\n", static_cast<long>(m.dim()),
                m.first_pc.size(), m.first_pc.length());
    return 0;
}

// ---- fit-params --------------------------------------------------------------

struct FitParamsArgs {
    std::string data;
    bool labeled = false;
    std::vector<double> k_fracs;
    std::vector<double> tau_scales;
    std::vector<std::string> qs;
    std::string out;
    std::string report;
};

int cmd_fit_params(const FitParamsArgs& a) {
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    std::vector<PcParams> grid;
    if (a.k_fracs.empty() && a.tau_scales.empty() && a.qs.empty()) {
        grid = default_pc_grid(d);
    } else {
        if (a.k_fracs.empty() || a.tau_scales.empty() || a.qs.empty()) {
            throw InvalidArgument("--k-fracs, --tau-scales and --qs must be given together");
        }
        const double scale = data_scale(d);
        for (double k : a.k_fracs) {
            for (double t : a.tau_scales) {
                for (const auto& q : a.qs) {
                    PcParams p;
                    p.k_frac = k;
                    p.tau = t * scale;
                    p.q = parse_q(q);
                    grid.push_back(p);
                }
            }
        }
    }
    PcFitResult r = fit_pc_params(d, grid, param_fit_origin(d));
    write_file_atomic(a.out, format_error_surface(r.surface));
    json best = {{"k_frac", r.best.k_frac},
                 {"tau", r.best.tau},
                 {"q", std::isinf(r.best.q) ? json("inf") : json(r.best.q)},
                 {"error", r.surface[r.best_index].error},
                 {"cell", r.best_index}};
    if (!a.report.empty()) write_json(a.report, {{"command", "fit-params"}, {"cells", r.surface.size()}, {"best", best}});
    std::printf("best k_frac=%g tau=%g q=%s error=%.6g\n", r.best.k_frac, r.best.tau,
                std::isinf(r.best.q) ? "inf" : CLI::detail::to_string(r.best.q).c_str(), r.surface[r.best_index].error);
    return 0;
}

// ---- transform -------------------------------------------------------------

struct TransformArgs {
    std::string model;
    std::string data;
    bool labeled = false;
    TransformOptions opts;
    std::string out;
    std::string report;
};

int cmd_transform(const TransformArgs& a) {
    SpcaModel m = load_model(a.model);
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    BatchTransform bt = transform_batch(m, d.points, a.opts);
    save_csv(matrix_dataset(bt.r), a.out);

    json samples = json::array();
    Eigen::Index converged = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const auto& err = bt.errors[static_cast<std::size_t>(i)];
        json s = {{"row", i}};
        if (err.empty()) {
            const Response& r = bt.responses[static_cast<std::size_t>(i)];
            s["converged"] = r.converged;
            s["iterations"] = r.iterations;
            s["residual"] = r.final_residual;
            if (r.converged) ++converged;
        } else {
            s["converged"] = false;
            s["error"] = err;
        }
        samples.push_back(s);
    }
    if (!a.report.empty()) {
        write_json(a.report, {{"command", "transform"},
                              {"n", d.size()},
                              {"converged", converged},
                              {"failed", bt.failures()},
                              {"tolerance", a.opts.tol_frac * m.diameter},
                              {"options", transform_options_json(a.opts)},
                              {"samples", samples}});
    }
    std::printf("transformed %ld rows: %ld converged, %ld failed\n", static_cast<long>(d.size()),
                static_cast<long>(converged), static_cast<long>(bt.failures()));
    return bt.failures() == 0 ? 0 : kExitNumeric;
}

// ---- invert ----------------------------------------------------------------

struct InvertArgs {
    std::string model;
    std::string responses;
    bool clamp = false;
    std::string out;
};

int cmd_invert(const InvertArgs& a) {
    SpcaModel m = load_model(a.model);
    Dataset r = load_csv(a.responses);
    if (r.dim() != m.dim()) throw InvalidArgument("responses have the wrong dimension for this model");
    PointMatrix x(r.size(), r.dim());
    Eigen::Index failed = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        try {
            x.row(i) = (a.clamp ? inverse_clamped(m, r.point(i)) : inverse(m, r.point(i))).transpose();
        } catch (const InversionFailure& e) {
            x.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
            std::fprintf(stderr, "row %ld: %s\n", static_cast<long>(i), e.what());
            ++failed;
        }
    }
    save_csv(Dataset(std::move(x)), a.out);
    std::printf("inverted %ld rows, %ld failed\n", static_cast<long>(r.size()), static_cast<long>(failed));
    return failed == 0 ? 0 : kExitNumeric;
}

// ---- reduce ----------------------------------------------------------------

struct ReduceArgs {
    std::string model;
    std::string data;
    bool labeled = false;
    Eigen::Index d_keep = 1;
    TransformOptions opts;
    std::string out_prefix;
};

int cmd_reduce(const ReduceArgs& a) {
    SpcaModel m = load_model(a.model);
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    if (a.d_keep < 1 || a.d_keep > m.dim()) throw InvalidArgument("--d-keep must be in [1, d]");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    PointMatrix reduced = PointMatrix::Constant(d.size(), a.d_keep, nan);
    PointMatrix back = PointMatrix::Constant(d.size(), m.dim(), nan);
    Eigen::Index failed = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        try {
            Reduction r = reduce(m, d.point(i), a.d_keep, a.opts);
            reduced.row(i) = r.r_reduced.transpose();
            back.row(i) = r.x_hat.transpose();
        } catch (const Error& e) {
            std::fprintf(stderr, "row %ld: %s\n", static_cast<long>(i), e.what());
            ++failed;
        }
    }
    save_csv(Dataset(std::move(reduced)), a.out_prefix + "_reduced.csv");
    save_csv(Dataset(std::move(back)), a.out_prefix + "_backprojected.csv");
    std::printf("reduced %ld rows to %ld dimensions, %ld failed\n", static_cast<long>(d.size()),
                static_cast<long>(a.d_keep), static_cast<long>(failed));
    return failed == 0 ? 0 : kExitNumeric;
}

// ---- code ------------------------------------------------------------------

struct CodeArgs {
    std::string model;
    std::string data;
    bool labeled = false;
    int total_bits = 6;
    TransformOptions opts;
    std::string out;
};

int cmd_code(const CodeArgs& a) {
    SpcaModel m = load_model(a.model);
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    BatchTransform bt = transform_batch(m, d.points, a.opts);
    std::vector<Eigen::Index> ok;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (bt.errors[static_cast<std::size_t>(i)].empty()) ok.push_back(i);
    }
    if (ok.size() < 2) throw InvalidArgument("fewer than 2 rows transformed; nothing to code");
    Matrix r(static_cast<Eigen::Index>(ok.size()), m.dim());
    Matrix x(static_cast<Eigen::Index>(ok.size()), m.dim());
    for (std::size_t i = 0; i < ok.size(); ++i) {
        r.row(static_cast<Eigen::Index>(i)) = bt.r.row(ok[i]);
        x.row(static_cast<Eigen::Index>(i)) = d.points.row(ok[i]);
    }
    std::vector<double> var;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        const double mu = r.col(j).mean();
        var.push_back((r.col(j).array() - mu).square().sum() / static_cast<double>(r.rows() - 1));
    }
    std::vector<int> bits = bit_allocate(var, a.total_bits);
    QuantizerSpec spec = make_quantizer(r, bits);
    QuantizeResult q = quantize_roundtrip(r, x, spec, m);

    json ranges = json::array();
    for (const auto& [lo, hi] : spec.ranges) ranges.push_back({lo, hi});
    write_json(a.out, {{"command", "code"},
                       {"n", d.size()},
                       {"transform_failures", bt.failures()},
                       {"total_bits", a.total_bits},
                       {"bits", bits},
                       {"bins", spec.bins_per_dim},
                       {"ranges", ranges},
                       {"rmse", q.rmse},
                       {"inversion_failures", q.failures},
                       {"clamped", q.clamped}});
    std::printf("rmse %.6g at %d bits\n", q.rmse, a.total_bits);
    return bt.failures() == 0 && q.failures == 0 ? 0 : kExitNumeric;
}

// ---- eval-mi ---------------------------------------------------------------

struct EvalMiArgs {
    std::string data;
    bool labeled = false;
    std::string pairs;
    int bins = 32;
    std::string out;
};

std::vector<std::pair<Eigen::Index, Eigen::Index>> parse_pairs(const std::string& spec, Eigen::Index d) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    if (spec.empty()) {
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = i + 1; j < d; ++j) out.emplace_back(i, j);
        }
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        long a = -1;
        long b = -1;
        try {
            if (colon == std::string::npos) throw std::invalid_argument(item);
            a = std::stol(item.substr(0, colon));
            b = std::stol(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidArgument("--pairs expects i:j[,i:j...], got '" + item + "'");
        }
        if (a < 0 || b < 0 || a >= d || b >= d || a == b) {
            throw InvalidArgument("--pairs: column index out of range in '" + item + "'");
        }
        out.emplace_back(a, b);
    }
    return out;
}

int cmd_eval_mi(const EvalMiArgs& a) {
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    json rows = json::array();
    for (auto [i, j] : parse_pairs(a.pairs, d.dim())) {
        std::vector<double> ci(d.points.col(i).begin(), d.points.col(i).end());
        std::vector<double> cj(d.points.col(j).begin(), d.points.col(j).end());
        MiEstimate mi = mutual_information(ci, cj, a.bins);
        rows.push_back({{"a", i}, {"b", j}, {"bits", mi.bits}, {"degenerate", mi.degenerate}});
        std::printf("MI(%ld,%ld) = %.6g bits\n", static_cast<long>(i), static_cast<long>(j), mi.bits);
    }
    if (!a.out.empty()) write_json(a.out, {{"command", "eval-mi"}, {"n", d.size()}, {"bins", a.bins}, {"pairs", rows}});
    return 0;
}

// ---- adapt -----------------------------------------------------------------

struct AdaptArgs {
    std::string model_a;
    std::string model_b;
    std::string data;
    bool labeled = false;
    bool clamp = false;
    TransformOptions opts;
    std::string out;
};

int cmd_adapt(const AdaptArgs& a) {
    SpcaModel ma = load_model(a.model_a);
    SpcaModel mb = load_model(a.model_b);
    Dataset d = load_csv(a.data, csv_opts(a.labeled));
    PointMatrix x = PointMatrix::Constant(d.size(), d.dim(), std::numeric_limits<double>::quiet_NaN());
    Eigen::Index failed = 0;
    Eigen::Index converged = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        try {
            AdaptResult r = domain_adapt(ma, mb, d.point(i), a.opts, a.clamp);
            x.row(i) = r.x_hat.transpose();
            if (r.converged) ++converged;
        } catch (const Error& e) {
            std::fprintf(stderr, "row %ld: %s\n", static_cast<long>(i), e.what());
            ++failed;
        }
    }
    save_csv(Dataset(std::move(x), d.labels), a.out, csv_opts(a.labeled));
    std::printf("adapted %ld rows: %ld converged, %ld failed\n", static_cast<long>(d.size()),
                static_cast<long>(converged), static_cast<long>(failed));
    return failed == 0 ? 0 : kExitNumeric;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential principal curves analysis"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
    c_gen->add_option("kind", gen.kind, "spiral | swissroll | twocluster | curve3d")
        ->required()
        ->check(CLI::IsMember({"spiral", "swissroll", "twocluster", "curve3d"}));
    c_gen->add_option("--n", gen.n, "number of samples")->capture_default_str();
    c_gen->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    c_gen->add_option("--sigma", gen.sigma, "swiss roll noise")->capture_default_str();
    c_gen->add_option("--alpha1", gen.alpha1, "two-cluster misalignment of cluster 1 (deg)")->capture_default_str();
    c_gen->add_option("--alpha2", gen.alpha2, "two-cluster misalignment of cluster 2 (deg)")->capture_default_str();
    c_gen->add_option("--theta1", gen.theta1, "two-cluster backbone bend (deg)")->capture_default_str();
    c_gen->add_option("--ratio1", gen.ratio1, "two-cluster std ratio of cluster 1")->capture_default_str();
    c_gen->add_option("--ratio2", gen.ratio2, "two-cluster std ratio of cluster 2")->capture_default_str();
    c_gen->add_option("--out", gen.out, "output CSV")->required();

    FitArgs fit_a;
    auto* c_fit = app.add_subcommand("fit", "fit a model and write it as JSON");
    c_fit->add_option("--data", fit_a.data, "training CSV")->required();
    c_fit->add_flag("--labeled", fit_a.labeled, "the last CSV column is a class label");
    add_pc_flags(c_fit, fit_a.pc);
    c_fit->add_option("--gamma", fit_a.gamma, "metric exponent")->capture_default_str();
    c_fit->add_option("--density-k", fit_a.density_k, "neighbours of the 1-d density estimate (0: auto)")
        ->capture_default_str();
    c_fit->add_option("--origin", fit_a.origin, "mean | densest")->capture_default_str();
    c_fit->add_option("--rate-bits", fit_a.rate_bits, "total bits behind the scaling constants (0: 3d)")
        ->capture_default_str();
    c_fit->add_option("--out", fit_a.out, "output model JSON")->required();

    FitParamsArgs fp;
    auto* c_fp = app.add_subcommand("fit-params", "projection error over a k_frac x tau x q grid");
    c_fp->add_option("--data", fp.data, "dataset CSV")->required();
    c_fp->add_flag("--labeled", fp.labeled, "the last CSV column is a class label");
    c_fp->add_option("--k-fracs", fp.k_fracs, "k_frac values")->delimiter(',');
    c_fp->add_option("--tau-scales", fp.tau_scales, "tau values as multiples of the data scale")->delimiter(',');
    c_fp->add_option("--qs", fp.qs, "q values (inf allowed)")->delimiter(',');
    c_fp->add_option("--out", fp.out, "error surface CSV")->required();
    c_fp->add_option("--report", fp.report, "best-cell JSON");

    TransformArgs tr;
    auto* c_tr = app.add_subcommand("transform", "responses of the rows of a CSV");
    c_tr->add_option("--model", tr.model, "model JSON")->required();
    c_tr->add_option("--data", tr.data, "input CSV")->required();
    c_tr->add_flag("--labeled", tr.labeled, "the last CSV column is a class label");
    add_transform_flags(c_tr, tr.opts);
    c_tr->add_option("--out", tr.out, "responses CSV")->required();
    c_tr->add_option("--report", tr.report, "convergence report JSON");

    InvertArgs inv;
    auto* c_inv = app.add_subcommand("invert", "reconstruct inputs from responses");
    c_inv->add_option("--model", inv.model, "model JSON")->required();
    c_inv->add_option("--responses", inv.responses, "responses CSV")->required();
    c_inv->add_flag("--clamp", inv.clamp, "clamp out-of-range components instead of failing");
    c_inv->add_option("--out", inv.out, "reconstruction CSV")->required();

    ReduceArgs red;
    auto* c_red = app.add_subcommand("reduce", "keep the leading responses and back-project");
    c_red->add_option("--model", red.model, "model JSON")->required();
    c_red->add_option("--data", red.data, "input CSV")->required();
    c_red->add_flag("--labeled", red.labeled, "the last CSV column is a class label");
    c_red->add_option("--d-keep", red.d_keep, "responses kept")->required();
    add_transform_flags(c_red, red.opts);
    c_red->add_option("--out", red.out_prefix, "output prefix")->required();

    CodeArgs code;
    auto* c_code = app.add_subcommand("code", "quantize responses and measure the input-domain RMSE");
    c_code->add_option("--model", code.model, "model JSON")->required();
    c_code->add_option("--data", code.data, "input CSV")->required();
    c_code->add_flag("--labeled", code.labeled, "the last CSV column is a class label");
    c_code->add_option("--total-bits", code.total_bits, "bits shared among the dimensions")->capture_default_str();
    add_transform_flags(c_code, code.opts);
    c_code->add_option("--out", code.out, "report JSON")->required();

    EvalMiArgs mi;
    auto* c_mi = app.add_subcommand("eval-mi", "pairwise mutual information of CSV columns");
    c_mi->add_option("--data", mi.data, "CSV")->required();
    c_mi->add_flag("--labeled", mi.labeled, "the last CSV column is a class label");
    c_mi->add_option("--pairs", mi.pairs, "column pairs i:j[,i:j...] (default: all)");
    c_mi->add_option("--bins", mi.bins, "histogram bins per axis")->capture_default_str();
    c_mi->add_option("--out", mi.out, "report JSON");

    AdaptArgs ad;
    auto* c_ad = app.add_subcommand("adapt", "map samples of domain B into domain A");
    c_ad->add_option("--model-a", ad.model_a, "model of the target domain")->required();
    c_ad->add_option("--model-b", ad.model_b, "model of the source domain")->required();
    c_ad->add_option("--data", ad.data, "CSV of domain B samples")->required();
    c_ad->add_flag("--labeled", ad.labeled, "the last CSV column is a class label");
    c_ad->add_flag("--clamp", ad.clamp, "clamp out-of-range responses when inverting");
    add_transform_flags(c_ad, ad.opts);
    c_ad->add_option("--out", ad.out, "adapted CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code_ = app.exit(e);
        return code_ == 0 ? 0 : kExitUsage;
    }

    if (*c_gen) return guarded([&] { return cmd_gen(gen); });
    if (*c_fit) return guarded([&] { return cmd_fit(fit_a); });
    if (*c_fp) return guarded([&] { return cmd_fit_params(fp); });
    if (*c_tr) return guarded([&] { return cmd_transform(tr); });
    if (*c_inv) return guarded([&] { return cmd_invert(inv); });
    if (*c_red) return guarded([&] { return cmd_reduce(red); });
    if (*c_code) return guarded([&] { return cmd_code(code); });
    if (*c_mi) return guarded([&] { return cmd_eval_mi(mi); });
    if (*c_ad) return guarded([&] { return cmd_adapt(ad); });
    return kExitUsage;
}
