#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mtavg/bench.hpp"
#include "mtavg/concentration.hpp"
#include "mtavg/io.hpp"
#include "mtavg/parallel.hpp"

using namespace mtavg;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    bool seed_set = false;
    int threads = 0;
    std::string config_path;
};

KernelSpec parse_kernel(const std::string& kind, double width) {
    if (kind == "linear") return KernelSpec::linear();
    if (kind == "rbf") return KernelSpec::rbf(width > 0 ? width : 1.0);
    throw CLI::ValidationError("kernel must be 'linear' or 'rbf'");
}

// width <= 0 selects the pooled average feature stddev
KernelSpec resolve_kernel(const std::string& kind, double width,
                          const std::vector<Bag>& bags) {
    if (kind == "rbf" && width <= 0) return KernelSpec::rbf(average_feature_stddev(bags));
    return parse_kernel(kind, width);
}

void save_graph_csv(const std::string& path, const NeighborGraph& g,
                    const std::vector<Bag>& bags) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "bag_i,bag_j\n";
    for (Eigen::Index i = 0; i < g.size(); ++i)
        for (Eigen::Index j = 0; j < g.size(); ++j)
            if (g.edge(i, j))
                out << bags[std::size_t(i)].id << ',' << bags[std::size_t(j)].id << "\n";
}

void save_weights_csv(const std::string& path, const WeightMatrix& w,
                      const std::vector<Bag>& bags) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "bag_i,bag_j,weight\n";
    char buf[40];
    for (Eigen::Index i = 0; i < w.values.rows(); ++i)
        for (Eigen::Index j = 0; j < w.values.cols(); ++j) {
            if (w.values(i, j) == 0.0) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", w.values(i, j));
            out << bags[std::size_t(i)].id << ',' << bags[std::size_t(j)].id << ','
                << buf << "\n";
        }
}

void save_means_csv(const std::string& path, const Eigen::MatrixXd& means,
                    const std::vector<std::string>& ids) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "bag_id";
    for (Eigen::Index j = 0; j < means.cols(); ++j) out << ",f" << j;
    out << "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < means.rows(); ++i) {
        out << ids[std::size_t(i)];
        for (Eigen::Index j = 0; j < means.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", means(i, j));
            out << ',' << buf;
        }
        out << "\n";
    }
}

int cmd_generate(const GlobalOpts& g, const std::string& model, int B, int N, int d,
                 double radius, const std::string& out_path,
                 const std::string& means_out) {
    const std::set<std::string> gaussians{"unif", "cluster", "sphere", "sparse"};
    if (gaussians.count(model)) {
        GaussianModel m;
        m.kind = gaussian_model_from_name(model);
        if (B > 0) m.B = B;
        if (d > 0) m.d = d;
        m.seed = g.seed;
        GaussianData data = gen_gaussian(m);
        std::vector<Bag> bags;
        bags.reserve(std::size_t(m.B));
        std::vector<std::string> ids;
        for (int i = 0; i < m.B; ++i) {
            char id[32];
            std::snprintf(id, sizeof(id), "bag_%04d", i);
            ids.emplace_back(id);
            bags.emplace_back(id, data.observations.row(i));
        }
        save_bags_csv(out_path, bags);
        if (!means_out.empty()) save_means_csv(means_out, data.means, ids);
        std::cout << "wrote " << m.B << " single-observation bags to " << out_path << "\n";
        return 0;
    }
    ToySetup setup;
    setup.kind = toy_kind_from_name(model);
    if (B > 0) setup.B = B;
    if (N > 0) setup.N = N;
    setup.radius = radius;
    ToyData data = gen_toy(setup, g.seed);
    save_bags_csv(out_path, data.bags);
    std::cout << "wrote " << data.bags.size() << " bags to " << out_path << "\n";
    return 0;
}

int cmd_test(const GlobalOpts& g, const std::string& bags_path, const std::string& mode,
             double zeta, const std::string& kernel_kind, double width,
             const std::string& out_path) {
    (void)g;
    std::vector<Bag> bags = load_bags_csv(bags_path);
    NeighborGraph graph;
    if (mode == "gaussian") {
        const int n = static_cast<int>(bags.front().size());
        for (const Bag& b : bags)
            if (b.size() != n)
                throw std::runtime_error("gaussian tests assume equal bag sizes");
        graph = build_neighbor_graph_gaussian(naive_means(bags), zeta, n);
    } else if (mode == "kme") {
        graph = build_neighbor_graph_kme(bags, resolve_kernel(kernel_kind, width, bags), zeta);
    } else {
        throw CLI::ValidationError("mode must be 'gaussian' or 'kme'");
    }
    save_graph_csv(out_path, graph, bags);
    Eigen::Index edges = 0;
    for (Eigen::Index i = 0; i < graph.size(); ++i) edges += graph.neighbor_count(i);
    std::cout << "wrote " << edges << " edges (" << graph.size() << " bags) to "
              << out_path << "\n";
    return 0;
}

int cmd_estimate(const GlobalOpts& g, const std::string& bags_path,
                 const std::string& method_name_, double zeta, double gamma, double c,
                 double mta_gamma, double tau, bool gamma_thm2,
                 const std::string& kernel_kind, double width, const std::string& out_path,
                 const std::string& means_out) {
    (void)g;
    std::vector<Bag> bags = load_bags_csv(bags_path);
    KernelSpec kernel = resolve_kernel(kernel_kind, width, bags);
    const Method method = method_from_name(method_name_);
    if (gamma_thm2) gamma = tau / (1.0 + tau);

    WeightMatrix w;
    const Eigen::Index b = static_cast<Eigen::Index>(bags.size());
    switch (method) {
        case Method::ne:
            w = {Eigen::MatrixXd::Identity(b, b), Method::ne};
            break;
        case Method::rkmse:
            w = rkmse_weights(bags, kernel);
            break;
        case Method::stb0:
            w = stb_weights(build_neighbor_graph_kme(bags, kernel, zeta),
                            ShrinkageMode::stb_zero());
            break;
        case Method::stb_weight:
            w = stb_weights(build_neighbor_graph_kme(bags, kernel, zeta),
                            ShrinkageMode::stb_weight(gamma));
            break;
        case Method::stb_theory:
            w = stb_weights(build_neighbor_graph_kme(bags, kernel, zeta),
                            ShrinkageMode::stb_theory(c, zeta));
            break;
        case Method::mta_const:
            w = mta_weights(bags, kernel, mta_gamma, MtaSimilarity::constant);
            break;
        case Method::mta_stb: {
            NeighborGraph graph = build_neighbor_graph_kme(bags, kernel, zeta);
            w = mta_weights(bags, kernel, mta_gamma, MtaSimilarity::graph, &graph);
            break;
        }
        case Method::pp_james_stein:
            throw std::runtime_error(
                "pp_james_stein shrinks explicit vectors; use the gaussian bench mode");
    }
    save_weights_csv(out_path, w, bags);
    std::cout << "wrote " << method_name(method) << " weights to " << out_path << "\n";
    if (!means_out.empty()) {
        if (kernel.kind != KernelKind::linear)
            throw std::runtime_error("--means-out requires the linear kernel");
        std::vector<std::string> ids;
        for (const Bag& bag : bags) ids.push_back(bag.id);
        save_means_csv(means_out, apply_weights(w, naive_means(bags)), ids);
    }
    return 0;
}

ExperimentConfig prepare_config(const GlobalOpts& g) {
    if (g.config_path.empty())
        throw CLI::ValidationError("--config <path> is required for this subcommand");
    ExperimentConfig cfg = load_config(g.config_path);
    if (g.threads > 0) cfg.threads = g.threads;
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

int cmd_tune(const GlobalOpts& g, const std::string& out_path) {
    ExperimentConfig cfg = prepare_config(g);
    TuneResult r = tune(cfg);
    const std::string text = tune_result_json(r);
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        out << text << "\n";
        std::cout << "wrote tuned parameters to " << out_path << "\n";
    }
    return 0;
}

int cmd_bench(const GlobalOpts& g, const std::string& params_path,
              const std::string& out_override) {
    ExperimentConfig cfg = prepare_config(g);
    if (!out_override.empty()) cfg.output = out_override;
    if (!cfg.sweep_variable.empty()) {
        auto results = run_sweep(cfg);
        write_sweep_csv(cfg.output, cfg.sweep_variable, results);
        std::cout << "wrote sweep report to " << cfg.output << "\n";
        return 0;
    }
    BenchReport report;
    if (!params_path.empty()) {
        std::ifstream in(params_path);
        if (!in) throw std::runtime_error("cannot open '" + params_path + "'");
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        TuneResult params = tune_result_from_json_text(text);
        report = run_benchmark(cfg, &params);
    } else {
        report = run_benchmark(cfg);
    }
    write_report_csv(cfg.output, report);
    std::cout << "wrote report to " << cfg.output << "\n";
    for (const MethodResult& row : report.rows)
        std::cout << "  " << method_name(row.method) << ": mean_loss=" << row.mean_loss
                  << " pct_decrease=" << row.pct_decrease << "\n";
    return 0;
}

int cmd_verify_bounds(const GlobalOpts& g, long reps, std::vector<double> ts,
                      std::vector<std::string> kind_names, const std::string& out_path) {
    std::vector<CheckKind> kinds;
    if (kind_names.empty()) {
        kinds = all_check_kinds();
    } else {
        for (const auto& name : kind_names) kinds.push_back(check_kind_from_name(name));
    }
    if (ts.empty()) ts = {1.0, 2.0, 3.0};
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << "kind,t,reps,bound,rate,pass\n";
    bool all_pass = true;
    const int threads = g.threads > 0 ? g.threads : hardware_threads();
    for (CheckKind kind : kinds) {
        for (double t : ts) {
            ConcentrationCheck check;
            check.kind = kind;
            check.t = t;
            check.reps = kind == CheckKind::gram_frobenius ? std::min<long>(reps, 100) : reps;
            check.seed = g.seed;
            CheckResult r = run_check(check, threads);
            all_pass = all_pass && r.pass;
            char line[160];
            std::snprintf(line, sizeof(line), "%s,%g,%ld,%.6g,%.6g,%s\n",
                          check_kind_name(kind).c_str(), t, r.reps, r.bound,
                          r.violation_rate, r.pass ? "true" : "false");
            out << line;
            std::cout << line;
        }
    }
    std::cout << (all_pass ? "all bounds hold" : "BOUND VIOLATION DETECTED") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-task mean and kernel-mean-embedding estimation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master random seed")
        ->each([&g](const std::string&) { g.seed_set = true; });
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
    app.add_option("--config", g.config_path, "experiment config (json)");

    // generate
    auto* gen = app.add_subcommand("generate", "write synthetic bags to csv");
    std::string gen_model = "num_bags", gen_out = "bags.csv", gen_means_out;
    int gen_B = 0, gen_N = 0, gen_d = 0;
    double gen_radius = 0.0;
    gen->add_option("--model", gen_model,
                    "unif|cluster|sphere|sparse|bag_sizes|num_bags|imbalanced|clustered");
    gen->add_option("--B", gen_B, "number of bags");
    gen->add_option("--N", gen_N, "samples per bag (toy setups)");
    gen->add_option("--d", gen_d, "ambient dimension (gaussian models)");
    gen->add_option("--radius", gen_radius, "cluster circle radius (clustered setup)");
    gen->add_option("--out", gen_out, "output csv path");
    gen->add_option("--means-out", gen_means_out, "also write the true means (gaussian)");

    // test
    auto* tst = app.add_subcommand("test", "build the neighbor graph from bags");
    std::string tst_bags, tst_mode = "kme", tst_kernel = "rbf", tst_out = "graph.csv";
    double tst_zeta = 1.0, tst_width = 0.0;
    tst->add_option("--bags", tst_bags, "input bag csv")->required();
    tst->add_option("--mode", tst_mode, "gaussian|kme");
    tst->add_option("--zeta", tst_zeta, "test threshold");
    tst->add_option("--kernel", tst_kernel, "linear|rbf");
    tst->add_option("--width", tst_width, "rbf width (0 = pooled feature stddev)");
    tst->add_option("--out", tst_out, "output edge csv");

    // estimate
    auto* est = app.add_subcommand("estimate", "compute estimator weights for bags");
    std::string est_bags, est_method = "stb0", est_kernel = "rbf";
    std::string est_out = "weights.csv", est_means_out;
    double est_zeta = 1.0, est_gamma = 0.0, est_c = 1.0, est_mta_gamma = 1.0;
    double est_width = 0.0, est_tau = 1.0;
    bool est_gamma_thm2 = false;
    est->add_option("--bags", est_bags)->required();
    est->add_option("--method", est_method,
                    "ne|rkmse|stb0|stb_weight|stb_theory|mta_const|mta_stb");
    est->add_option("--zeta", est_zeta);
    est->add_option("--gamma", est_gamma);
    est->add_option("--c", est_c);
    est->add_option("--mta-gamma", est_mta_gamma);
    est->add_option("--tau", est_tau, "tau for --gamma-thm2");
    est->add_flag("--gamma-thm2", est_gamma_thm2, "use gamma = tau / (1 + tau)");
    est->add_option("--kernel", est_kernel, "linear|rbf");
    est->add_option("--width", est_width);
    est->add_option("--out", est_out);
    est->add_option("--means-out", est_means_out, "write the mixed means (linear kernel)");

    // tune / bench
    auto* tun = app.add_subcommand("tune", "grid-search parameters per method");
    std::string tun_out;
    tun->add_option("--out", tun_out, "output params json (stdout if omitted)");

    auto* ben = app.add_subcommand("bench", "run the benchmark and write a report");
    std::string ben_params, ben_out;
    ben->add_option("--params", ben_params, "tuned params json (tunes first if omitted)");
    ben->add_option("--out", ben_out, "override the report path");

    // verify-bounds
    auto* ver = app.add_subcommand("verify-bounds",
                                   "monte-carlo verification of the deviation bounds");
    long ver_reps = 100000;
    std::vector<double> ver_ts;
    std::vector<std::string> ver_kinds;
    std::string ver_out = "bounds.csv";
    ver->add_option("--reps", ver_reps, "replicates per check");
    ver->add_option("--t", ver_ts, "deviation levels (default 1 2 3)");
    ver->add_option("--kinds", ver_kinds, "subset of check kinds");
    ver->add_option("--out", ver_out, "output csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen)
            return cmd_generate(g, gen_model, gen_B, gen_N, gen_d, gen_radius, gen_out,
                                gen_means_out);
        if (*tst) return cmd_test(g, tst_bags, tst_mode, tst_zeta, tst_kernel, tst_width, tst_out);
        if (*est)
            return cmd_estimate(g, est_bags, est_method, est_zeta, est_gamma, est_c,
                                est_mta_gamma, est_tau, est_gamma_thm2, est_kernel,
                                est_width, est_out, est_means_out);
        if (*tun) return cmd_tune(g, tun_out);
        if (*ben) return cmd_bench(g, ben_params, ben_out);
        if (*ver) return cmd_verify_bounds(g, ver_reps, ver_ts, ver_kinds, ver_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
