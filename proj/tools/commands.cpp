#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "engine.hpp"
#include "io_formats.hpp"
#include "metrics.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using orpca::MatrixXd;
using orpca::VectorXd;

namespace orpca_cli {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_ev_csv(const std::string& path, const std::vector<double>& trace) {
    std::ostringstream out;
    out << "sample,ev\n";
    for (size_t i = 0; i < trace.size(); ++i)
        out << (i + 1) << ',' << fmt17(trace[i]) << '\n';
    orpca::atomic_write_file(path, out.str());
}

json params_json(const orpca_params& p) {
    return json{{"alpha_e", p.alpha_e},
                {"alpha_r", p.alpha_r},
                {"g0", p.g0},
                {"mu", p.mu},
                {"eta_e", p.eta_e},
                {"eta_r", p.eta_r},
                {"eta_l", p.eta_l},
                {"t_e", p.t_e},
                {"t_r", p.t_r},
                {"t_l", p.t_l},
                {"t0", p.t0},
                {"budget_cap", p.budget_cap},
                {"conv_tol", p.conv_tol},
                {"loss_exit_low", p.loss_exit_low},
                {"loss_exit_high", p.loss_exit_high}};
}

void write_manifest(const std::string& dir, json manifest) {
    manifest["version"] = orpca_version();
    orpca::atomic_write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

void write_timing(const std::string& dir,
                  const std::vector<std::pair<std::string, double>>& rows) {
    std::ostringstream out;
    out << "label,seconds\n";
    char buf[64];
    for (const auto& [label, secs] : rows) {
        std::snprintf(buf, sizeof buf, "%.6f", secs);
        out << label << ',' << buf << '\n';
    }
    orpca::atomic_write_file(dir + "/timing.csv", out.str());
}

struct stream_outputs {
    MatrixXd L;  // final basis p x r
    MatrixXd R;  // n x r
    MatrixXd E;  // p x n
    std::vector<double> ev;
    std::vector<int> iters;
    std::vector<double> fidelity;
    int64_t diverged = 0;
};

// drive the engine through the shared-library interface
stream_outputs run_engine(const MatrixXd& Z, int rank,
                          const orpca_params& prm, const MatrixXd* truth) {
    const int p = int(Z.rows());
    orpca_engine* eng = orpca_engine_create(p, rank, &prm);
    if (!eng)
        throw std::invalid_argument("engine rejected the configuration");
    stream_outputs out;
    out.R.resize(Z.cols(), rank);
    out.E.resize(Z.rows(), Z.cols());
    VectorXd rbuf(rank), ebuf(p);
    MatrixXd basis(p, rank);
    for (Eigen::Index t = 0; t < Z.cols(); ++t) {
        VectorXd z = Z.col(t);
        int32_t iters = 0;
        int rc = orpca_engine_process(eng, z.data(), p, rbuf.data(),
                                      ebuf.data(), &iters);
        if (rc != ORPCA_OK) {
            orpca_engine_destroy(eng);
            throw std::invalid_argument(orpca_strerror(rc));
        }
        orpca_engine_basis(eng, basis.data());
        out.R.row(t) = rbuf.transpose();
        out.E.col(t) = ebuf;
        out.iters.push_back(iters);
        out.fidelity.push_back(
            orpca::fidelity_loss(z, basis * rbuf, ebuf));
        if (truth)
            out.ev.push_back(orpca::explained_variance(basis, *truth));
    }
    orpca_engine_basis(eng, basis.data());
    out.L = basis;
    out.diverged = orpca_engine_divergences(eng);
    orpca_engine_destroy(eng);
    return out;
}

stream_outputs run_explicit(const MatrixXd& Z, int rank, double lambda1,
                            double lambda2, const MatrixXd* truth) {
    const int p = int(Z.rows());
    orpca_baseline* b = orpca_baseline_create(p, rank, lambda1, lambda2);
    if (!b)
        throw std::invalid_argument("baseline rejected the configuration");
    stream_outputs out;
    out.R.resize(Z.cols(), rank);
    out.E.resize(Z.rows(), Z.cols());
    VectorXd rbuf(rank), ebuf(p);
    MatrixXd basis(p, rank);
    for (Eigen::Index t = 0; t < Z.cols(); ++t) {
        VectorXd z = Z.col(t);
        int32_t iters = 0;
        int rc = orpca_baseline_process(b, z.data(), p, rbuf.data(),
                                        ebuf.data(), &iters);
        if (rc != ORPCA_OK) {
            orpca_baseline_destroy(b);
            throw std::invalid_argument(orpca_strerror(rc));
        }
        orpca_baseline_basis(b, basis.data());
        out.R.row(t) = rbuf.transpose();
        out.E.col(t) = ebuf;
        out.iters.push_back(iters);
        out.fidelity.push_back(
            orpca::fidelity_loss(z, basis * rbuf, ebuf));
        if (truth)
            out.ev.push_back(orpca::explained_variance(basis, *truth));
    }
    orpca_baseline_basis(b, basis.data());
    out.L = basis;
    orpca_baseline_destroy(b);
    return out;
}

int classify(const std::exception& ex) {
    if (auto* io = dynamic_cast<const orpca::io_error*>(&ex))
        return io->kind == orpca::io_error::open_failed ? exit_io
                                                        : exit_config;
    if (dynamic_cast<const orpca::divergence_error*>(&ex))
        return exit_diverged;
    if (dynamic_cast<const std::invalid_argument*>(&ex)) return exit_config;
    return exit_io;
}

MatrixXd load_matrix_any(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw orpca::io_error(orpca::io_error::open_failed,
                              "cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::string(magic, 4) == "ORPM") return orpca::read_matrix(path);
    return orpca::read_csv_matrix(path);
}

}  // namespace

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw orpca::io_error(orpca::io_error::open_failed,
                              "cannot open " + path);
    uint64_t h = 14695981039346656037ULL;
    char buf[65536];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= (unsigned char)buf[i];
            h *= 1099511628211ULL;
        }
        if (!f) break;
    }
    return h;
}

int cmd_simulate(const simulate_args& args) {
    try {
        orpca::synthetic_config cfg;
        if (!args.preset.empty()) {
            cfg = orpca::preset(args.preset);
        } else {
            cfg.p = args.p;
            cfg.n = args.n;
            cfg.r_true = args.r_true;
            cfg.rho = args.rho;
            cfg.magnitude = args.magnitude;
        }
        int rank = args.rank > 0 ? args.rank : cfg.r_true;
        if (args.algo != "implicit" && args.algo != "explicit" &&
            args.algo != "both")
            throw std::invalid_argument("unknown algo '" + args.algo + "'");
        if (args.seeds < 1)
            throw std::invalid_argument("seeds must be >= 1");
        if (args.out_dir.empty())
            throw std::invalid_argument("output directory required");

        double lambda1, lambda2;
        if (args.lambda_mode == "default") {
            lambda1 = lambda2 = 1.0 / std::sqrt(double(cfg.p));
        } else if (args.lambda_mode == "tuned") {
            lambda1 = lambda2 = 1.0;
        } else if (args.lambda_mode == "custom") {
            lambda1 = args.lambda1;
            lambda2 = args.lambda2;
            if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
                throw std::invalid_argument("custom lambdas must be > 0");
        } else {
            throw std::invalid_argument("unknown lambda mode '" +
                                        args.lambda_mode + "'");
        }

        fs::create_directories(args.out_dir);
        const bool want_impl =
            args.algo == "implicit" || args.algo == "both";
        const bool want_expl =
            args.algo == "explicit" || args.algo == "both";
        std::vector<std::vector<double>> impl_traces, expl_traces;
        std::vector<std::pair<std::string, double>> timing;
        std::vector<uint64_t> seed_list;
        int64_t diverged_total = 0;

        for (int s = 0; s < args.seeds; ++s) {
            uint64_t seed = args.seed0 + uint64_t(s);
            seed_list.push_back(seed);
            cfg.seed = seed;
            orpca::synthetic_dataset ds = orpca::generate(cfg);
            if (want_impl) {
                double t0 = now_seconds();
                stream_outputs so =
                    run_engine(ds.Z, rank, args.params, &ds.U);
                timing.emplace_back("implicit_seed" + std::to_string(seed),
                                    now_seconds() - t0);
                write_ev_csv(args.out_dir + "/ev_implicit_seed" +
                                 std::to_string(seed) + ".csv",
                             so.ev);
                impl_traces.push_back(std::move(so.ev));
                diverged_total += so.diverged;
            }
            if (want_expl) {
                double t0 = now_seconds();
                stream_outputs so =
                    run_explicit(ds.Z, rank, lambda1, lambda2, &ds.U);
                timing.emplace_back("explicit_seed" + std::to_string(seed),
                                    now_seconds() - t0);
                write_ev_csv(args.out_dir + "/ev_explicit_" +
                                 args.lambda_mode + "_seed" +
                                 std::to_string(seed) + ".csv",
                             so.ev);
                expl_traces.push_back(std::move(so.ev));
            }
        }
        if (want_impl)
            write_ev_csv(args.out_dir + "/ev_implicit_mean.csv",
                         orpca::mean_trace(impl_traces));
        if (want_expl)
            write_ev_csv(args.out_dir + "/ev_explicit_" + args.lambda_mode +
                             "_mean.csv",
                         orpca::mean_trace(expl_traces));

        json manifest{
            {"command", "simulate"},
            {"config",
             {{"p", cfg.p},
              {"n", cfg.n},
              {"r_true", cfg.r_true},
              {"rho", cfg.rho},
              {"magnitude", cfg.magnitude},
              {"rank", rank},
              {"algo", args.algo},
              {"lambda_mode", args.lambda_mode},
              {"lambda1", lambda1},
              {"lambda2", lambda2},
              {"solver", params_json(args.params)}}},
            {"seeds", seed_list},
            {"inputs", json::object()},
            {"diverged_samples", diverged_total}};
        write_manifest(args.out_dir, manifest);
        write_timing(args.out_dir, timing);
        return exit_ok;
    } catch (const std::exception& ex) {
        std::cerr << "simulate: " << ex.what() << "\n";
        return classify(ex);
    }
}

int cmd_run(const run_args& args) {
    try {
        if (args.input.empty() || args.out_dir.empty())
            throw std::invalid_argument("input and output directory required");
        MatrixXd Z = load_matrix_any(args.input);
        if (Z.rows() < 1 || Z.cols() < 1)
            throw std::invalid_argument("input matrix is empty");
        if (args.rank < 1 || args.rank > Z.rows())
            throw std::invalid_argument("rank must be in [1, p]");
        if (args.algo != "implicit" && args.algo != "explicit")
            throw std::invalid_argument("unknown algo '" + args.algo + "'");

        fs::create_directories(args.out_dir);
        double t0 = now_seconds();
        stream_outputs so;
        double lambda1 = args.lambda1, lambda2 = args.lambda2;
        if (args.algo == "implicit") {
            so = run_engine(Z, args.rank, args.params, nullptr);
        } else {
            if (lambda1 <= 0.0) lambda1 = 1.0 / std::sqrt(double(Z.rows()));
            if (lambda2 <= 0.0) lambda2 = 1.0 / std::sqrt(double(Z.rows()));
            so = run_explicit(Z, args.rank, lambda1, lambda2, nullptr);
        }
        double wall = now_seconds() - t0;

        orpca::write_matrix(args.out_dir + "/L.orpm", so.L);
        orpca::write_matrix(args.out_dir + "/R.orpm", so.R);
        orpca::write_matrix(args.out_dir + "/E.orpm", so.E);
        std::ostringstream diag;
        diag << "sample,inner_iters,fidelity\n";
        for (size_t i = 0; i < so.iters.size(); ++i)
            diag << (i + 1) << ',' << so.iters[i] << ','
                 << fmt17(so.fidelity[i]) << '\n';
        orpca::atomic_write_file(args.out_dir + "/diagnostics.csv",
                                 diag.str());

        json manifest{
            {"command", "run"},
            {"config",
             {{"rank", args.rank},
              {"algo", args.algo},
              {"lambda1", args.algo == "explicit" ? lambda1 : 0.0},
              {"lambda2", args.algo == "explicit" ? lambda2 : 0.0},
              {"solver", params_json(args.params)}}},
            {"inputs",
             {{args.input,
               "fnv1a:" + std::to_string(fnv1a_file(args.input))}}},
            {"diverged_samples", so.diverged}};
        write_manifest(args.out_dir, manifest);
        write_timing(args.out_dir, {{"run", wall}});
        return exit_ok;
    } catch (const std::exception& ex) {
        std::cerr << "run: " << ex.what() << "\n";
        return classify(ex);
    }
}

int cmd_frames(const frames_args& args) {
    try {
        std::vector<std::string> files = args.inputs;
        if (!args.list_file.empty()) {
            std::ifstream lf(args.list_file);
            if (!lf)
                throw orpca::io_error(orpca::io_error::open_failed,
                                      "cannot open " + args.list_file);
            std::string line;
            while (std::getline(lf, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (!line.empty()) files.push_back(line);
            }
        } else {
            std::sort(files.begin(), files.end());
        }
        if (files.empty())
            throw std::invalid_argument("no input frames");
        if (args.width < 1 || args.height < 1)
            throw std::invalid_argument("target size must be >= 1x1");
        const int p = args.width * args.height;
        if (args.rank < 1 || args.rank > p)
            throw std::invalid_argument("rank must be in [1, width*height]");
        if (args.out_dir.empty())
            throw std::invalid_argument("output directory required");
        fs::create_directories(args.out_dir);

        orpca::frame_spec spec{args.width, args.height};
        orpca_engine* eng =
            orpca_engine_create(p, args.rank, &args.params);
        if (!eng)
            throw std::invalid_argument("engine rejected the configuration");

        double t0 = now_seconds();
        int src_w = 0, src_h = 0;
        VectorXd rbuf(args.rank), ebuf(p);
        MatrixXd basis(p, args.rank);
        json input_list = json::array();
        char name[64];
        for (size_t i = 0; i < files.size(); ++i) {
            orpca::pgm_frame fr;
            try {
                fr = orpca::read_pgm_frame(files[i], spec);
            } catch (...) {
                orpca_engine_destroy(eng);
                throw;
            }
            if (i == 0) {
                src_w = fr.source_width;
                src_h = fr.source_height;
            } else if (fr.source_width != src_w ||
                       fr.source_height != src_h) {
                orpca_engine_destroy(eng);
                throw std::invalid_argument(
                    "mixed source dimensions in frame sequence");
            }
            int32_t iters = 0;
            int rc = orpca_engine_process(eng, fr.values.data(), p,
                                          rbuf.data(), ebuf.data(), &iters);
            if (rc != ORPCA_OK) {
                orpca_engine_destroy(eng);
                throw std::invalid_argument(orpca_strerror(rc));
            }
            orpca_engine_basis(eng, basis.data());
            std::snprintf(name, sizeof name, "bg_%06zu.pgm", i + 1);
            orpca::write_pgm_frame(args.out_dir + "/" + name, basis * rbuf,
                                   args.width, args.height);
            std::snprintf(name, sizeof name, "fg_%06zu.pgm", i + 1);
            orpca::write_pgm_frame(args.out_dir + "/" + name,
                                   ebuf.cwiseAbs(), args.width, args.height);
            input_list.push_back(
                json{{"frame", files[i]},
                     {"digest",
                      "fnv1a:" + std::to_string(fnv1a_file(files[i]))}});
        }
        int64_t diverged = orpca_engine_divergences(eng);
        orpca_engine_destroy(eng);

        json manifest{{"command", "frames"},
                      {"config",
                       {{"width", args.width},
                        {"height", args.height},
                        {"rank", args.rank},
                        {"source_width", src_w},
                        {"source_height", src_h},
                        {"solver", params_json(args.params)}}},
                      {"inputs", input_list},
                      {"diverged_samples", diverged}};
        write_manifest(args.out_dir, manifest);
        write_timing(args.out_dir, {{"frames", now_seconds() - t0}});
        return exit_ok;
    } catch (const std::exception& ex) {
        std::cerr << "frames: " << ex.what() << "\n";
        return classify(ex);
    }
}

int cmd_convert(const convert_args& args) {
    try {
        if (args.input.empty() || args.output.empty())
            throw std::invalid_argument("input and output paths required");
        MatrixXd m = load_matrix_any(args.input);
        std::string ext = fs::path(args.output).extension().string();
        if (ext == ".orpm") {
            orpca::write_matrix(args.output, m);
        } else if (ext == ".csv") {
            orpca::write_csv_matrix(args.output, m);
        } else {
            throw std::invalid_argument(
                "cannot infer output format from '" + ext + "'");
        }
        return exit_ok;
    } catch (const std::exception& ex) {
        std::cerr << "convert: " << ex.what() << "\n";
        return classify(ex);
    }
}

}  // namespace orpca_cli
