// Command-line front end: synthetic data generation, the online completion
// protocol, error-bound reports, and cross-validated model selection.

#include "omc/bounds.hpp"
#include "omc/eval.hpp"
#include "omc/ingest.hpp"
#include "omc/online.hpp"
#include "omc/rsvd.hpp"
#include "omc/soft_impute.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <random>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_seconds(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string hex_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct BackendOptions {
    std::string backend = "rsvd-seeded";
    omc::Index k = 50;
    omc::Index p = 10;
    omc::Index q = 2;
    double epsilon = 1e-3;
    omc::Index max_iterations = 100;
};

void add_backend_flags(CLI::App* cmd, BackendOptions& opts) {
    cmd->add_option("--backend", opts.backend, "SVD backend")
        ->check(CLI::IsMember({"exact", "rsvd", "rsvd-seeded"}))
        ->capture_default_str();
    cmd->add_option("--k", opts.k, "factorization rank budget")->capture_default_str();
    cmd->add_option("--p", opts.p, "oversampling columns")->capture_default_str();
    cmd->add_option("--q", opts.q, "power-scheme exponent")->capture_default_str();
    cmd->add_option("--epsilon", opts.epsilon, "convergence threshold")->capture_default_str();
    cmd->add_option("--max-iterations", opts.max_iterations, "iteration cap per solve")
        ->capture_default_str();
}

omc::SolverConfig make_solver(const BackendOptions& opts, std::uint64_t seed) {
    omc::SolverConfig config;
    config.epsilon = opts.epsilon;
    config.max_iterations = opts.max_iterations;
    config.rsvd = {opts.k, opts.p, opts.q, seed};
    if (opts.backend == "exact")
        config.backend = omc::SvdBackend::exact_dense;
    else if (opts.backend == "rsvd")
        config.backend = omc::SvdBackend::randomized;
    else
        config.backend = omc::SvdBackend::randomized_seeded;
    return config;
}

struct InputOptions {
    std::string manifest;
    std::string ratings;
    std::string start_date;
    omc::Index interval_days = 30;
    omc::Index slices = 1;
    omc::Index min_user_ratings = 0;
    omc::Index min_item_ratings = 0;
    double train_fraction = 0.8;
    std::string delimiter = ",";
    bool has_header = false;
    double scale_min = 0.5;
    double scale_max = 5.0;
    double scale_step = 0.5;
    bool no_scale_check = false;
};

void add_input_flags(CLI::App* cmd, InputOptions& opts) {
    auto* manifest = cmd->add_option("--manifest", opts.manifest,
                                     "manifest.json of a generated sequence");
    auto* ratings =
        cmd->add_option("--ratings", opts.ratings, "timestamped ratings file to slice");
    manifest->excludes(ratings);
    cmd->add_option("--start-date", opts.start_date,
                    "first cut is this UTC date (YYYY-MM-DD) plus one interval");
    cmd->add_option("--interval-days", opts.interval_days, "days between cuts")
        ->capture_default_str();
    cmd->add_option("--slices", opts.slices, "number of cumulative slices")
        ->capture_default_str();
    cmd->add_option("--min-user-ratings", opts.min_user_ratings,
                    "drop users with fewer ratings")
        ->capture_default_str();
    cmd->add_option("--min-item-ratings", opts.min_item_ratings,
                    "drop items with fewer ratings")
        ->capture_default_str();
    cmd->add_option("--train-fraction", opts.train_fraction,
                    "per-slice train share of observed entries")
        ->capture_default_str();
    cmd->add_option("--delimiter", opts.delimiter, "field separator in the ratings file")
        ->capture_default_str();
    cmd->add_flag("--header", opts.has_header, "skip the first line of the ratings file");
    cmd->add_option("--scale-min", opts.scale_min, "smallest legal rating")
        ->capture_default_str();
    cmd->add_option("--scale-max", opts.scale_max, "largest legal rating")
        ->capture_default_str();
    cmd->add_option("--scale-step", opts.scale_step, "rating step size (0 disables)")
        ->capture_default_str();
    cmd->add_flag("--no-scale-check", opts.no_scale_check, "accept any rating value");
}

std::int64_t parse_utc_date(const std::string& text) {
    std::tm tm{};
    if (std::sscanf(text.c_str(), "%d-%d-%d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday) != 3)
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return static_cast<std::int64_t>(timegm(&tm));
}

omc::SparseMatrix records_to_matrix(const std::vector<omc::RatingRecord>& records,
                                    omc::Index rows, omc::Index cols,
                                    const std::string& origin) {
    std::vector<omc::Triplet> entries;
    entries.reserve(records.size());
    for (const auto& rec : records) {
        const omc::Index r = static_cast<omc::Index>(rec.user_id) - 1;
        const omc::Index c = static_cast<omc::Index>(rec.item_id) - 1;
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw omc::DataError(origin + ": id (" + std::to_string(rec.user_id) + ", " +
                                 std::to_string(rec.item_id) + ") outside declared " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
        entries.push_back({r, c, rec.rating});
    }
    return omc::SparseMatrix(rows, cols, std::move(entries));
}

struct LoadedData {
    omc::MatrixSequence train;
    omc::MatrixSequence test;
    std::string source;
};

LoadedData load_from_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw omc::DataError("cannot open manifest: " + path);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw omc::DataError("malformed manifest " + path + ": " + e.what());
    }
    omc::FileFormat format;
    format.scale.reset();
    const fs::path dir = fs::path(path).parent_path();
    LoadedData data;
    data.source = path;
    try {
        for (const auto& entry : manifest.at("matrices")) {
            const auto rows = entry.at("rows").get<omc::Index>();
            const auto cols = entry.at("cols").get<omc::Index>();
            const std::string label = entry.at("label").get<std::string>();
            const std::string train_file = (dir / entry.at("train").get<std::string>()).string();
            const std::string test_file = (dir / entry.at("test").get<std::string>()).string();
            data.train.matrices.push_back(records_to_matrix(
                load_ratings(train_file, format), rows, cols, train_file));
            data.test.matrices.push_back(
                records_to_matrix(load_ratings(test_file, format), rows, cols, test_file));
            data.train.labels.push_back(label);
            data.test.labels.push_back(label);
        }
    } catch (const json::exception& e) {
        throw omc::DataError("manifest " + path + " missing fields: " + e.what());
    }
    if (data.train.matrices.empty())
        throw omc::DataError("manifest " + path + " lists no matrices");
    return data;
}

LoadedData load_from_ratings(const InputOptions& opts, std::uint64_t seed) {
    omc::FileFormat format;
    if (opts.delimiter.size() != 1)
        throw std::invalid_argument("--delimiter must be a single character");
    format.delimiter = opts.delimiter[0];
    format.has_header = opts.has_header;
    if (opts.no_scale_check)
        format.scale.reset();
    else
        format.scale = omc::RatingScale{opts.scale_min, opts.scale_max, opts.scale_step};
    const auto records = omc::load_ratings(opts.ratings, format);

    omc::SliceSpec spec;
    spec.start_epoch = opts.start_date.empty() ? 0 : parse_utc_date(opts.start_date);
    spec.interval_days = opts.interval_days;
    spec.count = opts.slices;
    spec.min_user_ratings = opts.min_user_ratings;
    spec.min_item_ratings = opts.min_item_ratings;
    const omc::MatrixSequence full = omc::slice_sequence(records, spec);

    LoadedData data;
    data.source = opts.ratings;
    for (std::size_t i = 0; i < full.matrices.size(); ++i) {
        auto [train, test] = omc::split_train_test(full.matrices[i], opts.train_fraction,
                                                   omc::derive_seed(seed, 300 + i));
        data.train.matrices.push_back(std::move(train));
        data.test.matrices.push_back(std::move(test));
        data.train.labels.push_back(full.labels[i]);
        data.test.labels.push_back(full.labels[i]);
    }
    return data;
}

LoadedData load_input(const InputOptions& opts, std::uint64_t seed) {
    if (!opts.manifest.empty()) return load_from_manifest(opts.manifest);
    if (!opts.ratings.empty()) return load_from_ratings(opts, seed);
    throw std::invalid_argument("one of --manifest or --ratings is required");
}

void write_json(const std::string& path, const json& value) {
    std::ofstream out(path);
    if (!out) throw omc::DataError("cannot write " + path);
    out << value.dump(2) << "\n";
}

// --- synth ---------------------------------------------------------------

struct SynthOptions {
    std::string out_dir;
    double scale = 0.1;
    omc::Index rank = 10;
    omc::Index t_total = 20;
    double noise_std = 0.1;
    double obs_start = 0.03;
    double obs_end = 0.10;
};

int cmd_synth(const SynthOptions& opts, std::uint64_t seed) {
    if (!(opts.scale > 0.0)) throw std::invalid_argument("--scale must be > 0");
    omc::SyntheticSpec spec;
    spec = spec.scaled(opts.scale);
    spec.rank = opts.rank;
    spec.t_total = opts.t_total;
    spec.noise_std = opts.noise_std;
    spec.obs_prob_start = opts.obs_start;
    spec.obs_prob_end = opts.obs_end;
    spec.seed = seed;
    const omc::SyntheticData data = omc::generate_synthetic(spec);

    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) throw omc::DataError("cannot create " + opts.out_dir + ": " + ec.message());

    const auto write_matrix = [&](const omc::SparseMatrix& x, const std::string& name,
                                  std::int64_t stamp) {
        const fs::path path = fs::path(opts.out_dir) / name;
        std::ofstream out(path);
        if (!out) throw omc::DataError("cannot write " + path.string());
        char buf[96];
        for (omc::Index i = 0; i < x.nnz(); ++i) {
            std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%lld\n",
                          static_cast<long long>(x.rows()[i] + 1),
                          static_cast<long long>(x.cols()[i] + 1), x.values()[i],
                          static_cast<long long>(stamp));
            out << buf;
        }
    };

    json manifest;
    manifest["type"] = "synthetic-sequence";
    manifest["seed"] = seed;
    manifest["spec"] = {{"t_total", spec.t_total},
                        {"rows_start", spec.rows_start},
                        {"cols_start", spec.cols_start},
                        {"rows_end", spec.rows_end},
                        {"cols_end", spec.cols_end},
                        {"rank", spec.rank},
                        {"obs_prob_start", spec.obs_prob_start},
                        {"obs_prob_end", spec.obs_prob_end},
                        {"noise_std", spec.noise_std},
                        {"scale", opts.scale}};
    manifest["matrices"] = json::array();
    for (std::size_t t = 0; t < data.train.matrices.size(); ++t) {
        char train_name[32];
        char test_name[32];
        std::snprintf(train_name, sizeof train_name, "train_%02zu.csv", t + 1);
        std::snprintf(test_name, sizeof test_name, "test_%02zu.csv", t + 1);
        const std::int64_t stamp = static_cast<std::int64_t>(t + 1) * 30 * 86400;
        write_matrix(data.train.matrices[t], train_name, stamp);
        write_matrix(data.test.matrices[t], test_name, stamp);
        manifest["matrices"].push_back({{"label", data.train.labels[t]},
                                        {"rows", data.train.matrices[t].n_rows()},
                                        {"cols", data.train.matrices[t].n_cols()},
                                        {"train", train_name},
                                        {"test", test_name}});
    }
    std::ostringstream canon;
    canon << "synth;seed=" << seed << ";scale=" << opts.scale << ";rank=" << spec.rank
          << ";t=" << spec.t_total << ";noise=" << spec.noise_std;
    manifest["config_hash"] = hex_hash(canon.str());
    write_json((fs::path(opts.out_dir) / "manifest.json").string(), manifest);
    std::cout << "wrote " << data.train.matrices.size() << " matrix pairs to " << opts.out_dir
              << "\n";
    return 0;
}

// --- online --------------------------------------------------------------

struct OnlineOptions {
    InputOptions input;
    BackendOptions backend;
    std::string restart = "warm";
    double rho = 0.5;
    bool no_center = false;
    bool postprocess = false;
    bool select_model = false;
    std::string out_csv;
    std::string out_json;
};

int cmd_online(const OnlineOptions& opts, std::uint64_t seed, int threads) {
    LoadedData data = load_input(opts.input, seed);
    omc::OnlineConfig config;
    config.solver = make_solver(opts.backend, seed);
    config.rho = opts.rho;
    config.center = !opts.no_center;
    config.postprocess = opts.postprocess;

    json selection = nullptr;
    if (opts.select_model) {
        omc::ModelSelectionGrid grid;
        const omc::ModelSelectionResult chosen = omc::select_model(
            data.train.matrices.front(), grid, config.solver, config.center,
            omc::derive_seed(seed, 42));
        config.rho = chosen.rho;
        config.solver.rsvd.k = chosen.k;
        selection = {{"rho", chosen.rho}, {"k", chosen.k}, {"cv_rmse", chosen.cv_rmse}};
        std::cout << "model selection: rho=" << chosen.rho << " k=" << chosen.k
                  << " cv_rmse=" << fmt_double(chosen.cv_rmse) << "\n";
    }

    const omc::RestartMode mode =
        opts.restart == "cold" ? omc::RestartMode::cold : omc::RestartMode::warm;
    const omc::SequenceResult result = run_sequence(data.train, data.test, config, mode);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!opts.out_csv.empty()) {
        file.open(opts.out_csv);
        if (!file) throw omc::DataError("cannot write " + opts.out_csv);
        out = &file;
    }
    *out << "label,train_rmse,test_rmse,theta_P,theta_Q,phi_sigma,seconds,rank,lambda,"
            "iterations\n";
    double total_seconds = 0.0;
    for (const auto& rec : result.records) {
        *out << rec.label << ',' << fmt_double(rec.train_rmse) << ','
             << fmt_double(rec.test_rmse) << ',' << fmt_double(rec.theta_p) << ','
             << fmt_double(rec.theta_q) << ',' << fmt_double(rec.phi_sigma) << ','
             << fmt_seconds(rec.seconds) << ',' << rec.rank << ',' << fmt_double(rec.lambda)
             << ',' << rec.iterations << '\n';
        total_seconds += rec.seconds;
    }

    std::ostringstream canon;
    canon << "online;seed=" << seed << ";backend=" << opts.backend.backend
          << ";k=" << config.solver.rsvd.k << ";p=" << config.solver.rsvd.p
          << ";q=" << config.solver.rsvd.q << ";epsilon=" << config.solver.epsilon
          << ";max_iterations=" << config.solver.max_iterations << ";rho=" << config.rho
          << ";restart=" << opts.restart << ";center=" << config.center
          << ";postprocess=" << config.postprocess << ";threads=" << threads
          << ";source=" << data.source;
    json summary;
    summary["seed"] = seed;
    summary["config_hash"] = hex_hash(canon.str());
    summary["backend"] = opts.backend.backend;
    summary["restart"] = opts.restart;
    summary["rho"] = config.rho;
    summary["k"] = config.solver.rsvd.k;
    summary["p"] = config.solver.rsvd.p;
    summary["q"] = config.solver.rsvd.q;
    summary["epsilon"] = config.solver.epsilon;
    summary["max_iterations"] = config.solver.max_iterations;
    summary["center"] = config.center;
    summary["postprocess"] = config.postprocess;
    summary["threads"] = threads;
    summary["source"] = data.source;
    summary["matrices"] = result.records.size();
    summary["total_iterations"] = result.total_iterations;
    summary["total_seconds"] = total_seconds;
    if (!selection.is_null()) summary["model_selection"] = selection;
    if (!opts.out_json.empty())
        write_json(opts.out_json, summary);
    else if (!opts.out_csv.empty())
        write_json(opts.out_csv + ".json", summary);
    return 0;
}

// --- bounds --------------------------------------------------------------

struct BoundsOptions {
    omc::Index m = 200;
    omc::Index n = 100;
    omc::Index k = 9;
    omc::Index p = 9;
    omc::Index q = 1;
    int trials = 200;
    double spectrum_ratio = 0.8;
    double rho = 0.5;
    std::string out_json;
};

int cmd_bounds(const BoundsOptions& opts, std::uint64_t seed) {
    if (!(opts.spectrum_ratio > 0.0 && opts.spectrum_ratio < 1.0))
        throw std::invalid_argument("--spectrum-ratio must be inside (0, 1)");
    const omc::Index r = std::min(opts.m, opts.n);
    omc::Vector sigma(r);
    for (omc::Index i = 0; i < r; ++i) sigma[i] = std::pow(opts.spectrum_ratio, double(i));
    const omc::Matrix a = omc::matrix_with_spectrum(opts.m, opts.n, sigma, seed);
    const omc::Vector tail = sigma.segment(opts.k, r - opts.k);

    omc::BoundInputs inputs;
    inputs.m = opts.m;
    inputs.n = opts.n;
    inputs.k = opts.k;
    inputs.p = opts.p;
    inputs.q = opts.q;
    inputs.sigma_tail = tail;

    const omc::RsvdParams params{opts.k, opts.p, opts.q, seed};
    const omc::TrialSummary trials = omc::rsvd_error_trials(a, params, opts.trials);

    json report;
    report["seed"] = seed;
    std::ostringstream canon;
    canon << "bounds;seed=" << seed << ";m=" << opts.m << ";n=" << opts.n << ";k=" << opts.k
          << ";p=" << opts.p << ";q=" << opts.q << ";trials=" << opts.trials
          << ";ratio=" << opts.spectrum_ratio << ";rho=" << opts.rho;
    report["config_hash"] = hex_hash(canon.str());
    report["backend"] = "rsvd";

    const auto emit = [&report](const std::string& name, double bound, double empirical,
                                int count, const std::string& note) {
        const bool pass = empirical <= bound;
        std::printf("%-22s bound=%-14s empirical=%-14s trials=%-5d %s%s\n", name.c_str(),
                    fmt_double(bound).c_str(), fmt_double(empirical).c_str(), count,
                    pass ? "PASS" : "FAIL", note.c_str());
        report[name] = {{"bound", bound},
                        {"empirical", empirical},
                        {"trials", count},
                        {"pass", pass}};
    };

    const std::string hypothesis_note =
        omc::spectral_hypothesis_holds(inputs) ? "" : "  (outside the p=k hypothesis)";
    emit("spectral_error", omc::spectral_bound(inputs), trials.mean_spectral_error,
         trials.trials, hypothesis_note);
    emit("projection_residual", omc::frobenius_power_bound(inputs), trials.mean_residual_sq,
         trials.trials, "");

    // Objective-gap section: a small completion instance, a few reference
    // iterations in, comparing exact and randomized shrinkage.
    {
        const omc::Index gm = 100, gn = 60, grank = 5;
        omc::Vector gsigma(grank);
        std::mt19937_64 gen(omc::derive_seed(seed, 77));
        for (omc::Index i = 0; i < grank; ++i)
            gsigma[i] = 1.0 - (gen() >> 11) * 0x1.0p-53;
        std::sort(gsigma.data(), gsigma.data() + grank, std::greater<double>());
        const omc::Matrix dense =
            10.0 * omc::matrix_with_spectrum(gm, gn, gsigma, omc::derive_seed(seed, 78));
        std::vector<omc::Triplet> observed;
        for (omc::Index i = 0; i < gm; ++i)
            for (omc::Index j = 0; j < gn; ++j)
                if ((gen() >> 11) * 0x1.0p-53 < 0.5) observed.push_back({i, j, dense(i, j)});
        const omc::SparseMatrix x(gm, gn, std::move(observed));
        const double lambda = opts.rho * omc::leading_singular_value(x, seed);
        omc::SolverConfig ref;
        ref.backend = omc::SvdBackend::exact_dense;
        ref.max_iterations = 3;
        const omc::CompletionSolution partial =
            omc::solve(x, lambda, omc::PartialSVD::zero(gm, gn), ref);
        const omc::GapTrials gap = omc::objective_gap_trials(x, partial.z, lambda, opts.k,
                                                             opts.q, seed, opts.trials);
        omc::BoundInputs ginputs;
        ginputs.m = gm;
        ginputs.n = gn;
        ginputs.k = opts.k;
        ginputs.p = opts.k;
        ginputs.q = opts.q;
        ginputs.lambda = lambda;
        ginputs.sigma_tail = gap.spectrum.size() > opts.k
                                 ? omc::Vector(gap.spectrum.tail(gap.spectrum.size() - opts.k))
                                 : omc::Vector();
        emit("objective_gap", omc::objective_gap_bound(ginputs), gap.mean_gap, gap.trials, "");
    }

    if (!opts.out_json.empty()) write_json(opts.out_json, report);
    return 0;
}

// --- select-model --------------------------------------------------------

struct SelectOptions {
    InputOptions input;
    BackendOptions backend;
    std::vector<double> rhos;
    std::vector<omc::Index> ks;
    int folds = 5;
    omc::Index max_entries = 5000000;
    bool no_center = false;
    std::string out_json;
};

int cmd_select_model(const SelectOptions& opts, std::uint64_t seed) {
    const LoadedData data = load_input(opts.input, seed);
    omc::ModelSelectionGrid grid;
    if (!opts.rhos.empty()) grid.rhos = opts.rhos;
    if (!opts.ks.empty()) grid.ks = opts.ks;
    grid.folds = opts.folds;
    grid.max_sampled_entries = opts.max_entries;
    const omc::SolverConfig solver = make_solver(opts.backend, seed);
    const omc::ModelSelectionResult result = omc::select_model(
        data.train.matrices.front(), grid, solver, !opts.no_center,
        omc::derive_seed(seed, 42));

    std::printf("selected rho=%s k=%lld cv_rmse=%s\n", fmt_double(result.rho).c_str(),
                static_cast<long long>(result.k), fmt_double(result.cv_rmse).c_str());
    std::printf("%8s", "k\\rho");
    for (const double rho : grid.rhos) std::printf(" %10s", fmt_double(rho).c_str());
    std::printf("\n");
    for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
        std::printf("%8lld", static_cast<long long>(grid.ks[ki]));
        for (std::size_t ri = 0; ri < grid.rhos.size(); ++ri)
            std::printf(" %10s", fmt_double(result.table[ki][ri]).c_str());
        std::printf("\n");
    }

    if (!opts.out_json.empty()) {
        std::ostringstream canon;
        canon << "select-model;seed=" << seed << ";backend=" << opts.backend.backend
              << ";folds=" << grid.folds << ";max_entries=" << grid.max_sampled_entries
              << ";center=" << !opts.no_center << ";source=" << data.source;
        json out;
        out["seed"] = seed;
        out["config_hash"] = hex_hash(canon.str());
        out["backend"] = opts.backend.backend;
        out["rho"] = result.rho;
        out["k"] = result.k;
        out["cv_rmse"] = result.cv_rmse;
        out["rhos"] = grid.rhos;
        out["ks"] = grid.ks;
        out["table"] = result.table;
        write_json(opts.out_json, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online nuclear-norm matrix completion with randomized SVD backends"};
    app.set_config("--config", "", "key=value config file; command-line flags win");
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
    app.add_option("--threads", threads, "worker thread cap (0 = library default)")
        ->capture_default_str();
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic matrix sequence");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--scale", synth.scale, "size multiplier on the full-size family")
        ->capture_default_str();
    synth_cmd->add_option("--rank", synth.rank, "rank of the underlying matrix")
        ->capture_default_str();
    synth_cmd->add_option("--t", synth.t_total, "sequence length")->capture_default_str();
    synth_cmd->add_option("--noise-std", synth.noise_std, "observation noise")
        ->capture_default_str();
    synth_cmd->add_option("--obs-start", synth.obs_start, "initial observation probability")
        ->capture_default_str();
    synth_cmd->add_option("--obs-end", synth.obs_end, "final observation probability")
        ->capture_default_str();

    OnlineOptions online;
    auto* online_cmd = app.add_subcommand("online", "run the online completion protocol");
    add_input_flags(online_cmd, online.input);
    add_backend_flags(online_cmd, online.backend);
    online_cmd->add_option("--restart", online.restart, "seeding between matrices")
        ->check(CLI::IsMember({"warm", "cold"}))
        ->capture_default_str();
    online_cmd->add_option("--rho", online.rho, "lambda as a fraction of sigma_1")
        ->capture_default_str();
    online_cmd->add_flag("--no-center", online.no_center, "skip row centering");
    online_cmd->add_flag("--postprocess", online.postprocess,
                         "refit singular values before scoring");
    online_cmd->add_flag("--select-model", online.select_model,
                         "pick rho and k by cross validation on the first matrix");
    online_cmd->add_option("--out", online.out_csv, "CSV output path (default stdout)");
    online_cmd->add_option("--json", online.out_json,
                           "summary path (default <out>.json when --out is set)");

    BoundsOptions bounds;
    auto* bounds_cmd =
        app.add_subcommand("bounds", "error bounds vs Monte-Carlo measurements");
    bounds_cmd->add_option("--m", bounds.m, "test matrix rows")->capture_default_str();
    bounds_cmd->add_option("--n", bounds.n, "test matrix columns")->capture_default_str();
    bounds_cmd->add_option("--k", bounds.k, "target rank")->capture_default_str();
    bounds_cmd->add_option("--p", bounds.p, "oversampling columns")->capture_default_str();
    bounds_cmd->add_option("--q", bounds.q, "power-scheme exponent")->capture_default_str();
    bounds_cmd->add_option("--trials", bounds.trials, "Monte-Carlo repetitions")
        ->capture_default_str();
    bounds_cmd->add_option("--spectrum-ratio", bounds.spectrum_ratio,
                           "geometric decay of the test spectrum")
        ->capture_default_str();
    bounds_cmd->add_option("--rho", bounds.rho, "lambda fraction for the objective-gap section")
        ->capture_default_str();
    bounds_cmd->add_option("--json", bounds.out_json, "write the report as JSON too");

    SelectOptions select;
    auto* select_cmd =
        app.add_subcommand("select-model", "cross-validated choice of rho and k");
    add_input_flags(select_cmd, select.input);
    add_backend_flags(select_cmd, select.backend);
    select_cmd->add_option("--rhos", select.rhos, "rho grid")->expected(-1);
    select_cmd->add_option("--ks", select.ks, "rank grid")->expected(-1);
    select_cmd->add_option("--folds", select.folds, "cross-validation folds")
        ->capture_default_str();
    select_cmd->add_option("--max-entries", select.max_entries, "entry sample cap")
        ->capture_default_str();
    select_cmd->add_flag("--no-center", select.no_center, "skip row centering");
    select_cmd->add_option("--json", select.out_json, "write the result as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
        app.exit(e);
        return 1;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, seed);
        if (online_cmd->parsed()) return cmd_online(online, seed, threads);
        if (bounds_cmd->parsed()) return cmd_bounds(bounds, seed);
        if (select_cmd->parsed()) return cmd_select_model(select, seed);
    } catch (const omc::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const omc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
