#pragma once

#include <map>

#include "mtavg/datagen.hpp"
#include "mtavg/estimators.hpp"

namespace mtavg {

enum class BenchMode { gaussian, kme_toy, kme_csv };
enum class ZetaProtocol { per_method, stb0_shared };

std::string bench_mode_name(BenchMode m);
BenchMode bench_mode_from_name(const std::string& name);

// Tuned parameters of one method; keys are a subset of
// {"zeta", "gamma", "c", "mta_gamma"}.
using Params = std::map<std::string, double>;
std::string params_json(const Params& p);

struct Grids {
    std::vector<double> zeta;
    std::vector<double> gamma;
    std::vector<double> c;
    std::vector<double> mta_gamma;
};

struct ExperimentConfig {
    BenchMode mode = BenchMode::kme_toy;

    GaussianModel gmodel;  // gaussian mode
    ToySetup toy;          // kme_toy mode

    std::string input_csv;         // kme_csv mode
    int subsample_n = 20;          // samples kept per bag per trial (csv mode)
    double train_fraction = 0.5;   // bag split for tuning vs evaluation (csv mode)

    KernelSpec kernel = KernelSpec::rbf(1.0);
    bool kernel_width_auto = true;  // width = pooled average feature stddev

    std::vector<Method> methods;
    Grids grids;

    int trials_tune = 100;
    int trials_eval = 200;
    int ref_bag_size = 1000;

    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    ZetaProtocol zeta_protocol = ZetaProtocol::per_method;

    std::string output = "report.csv";
    std::string sweep_variable;        // "", "N", "B" or "radius" (toy mode)
    std::vector<double> sweep_values;
};

// Built-in defaults mirroring the evaluation protocol of each mode; grids may
// be overridden through the config file.
ExperimentConfig default_gaussian_config(GaussianModelKind kind);
ExperimentConfig default_toy_config(ToyKind kind);

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& config);

using TuneResult = std::map<Method, Params>;
std::string tune_result_json(const TuneResult& r);
TuneResult tune_result_from_json_text(const std::string& text);

struct MethodResult {
    Method method = Method::ne;
    Params params;
    double mean_loss = 0.0;
    double stderr_ = 0.0;
    double pct_decrease = 0.0;  // 100 * (1 - mean_loss / mean_loss_NE)
};

struct BenchReport {
    std::vector<MethodResult> rows;
    // per-trial mean-over-task losses, one column per row entry (for paired
    // comparisons); not serialized to CSV
    Eigen::MatrixXd trial_losses;

    const MethodResult& row(Method m) const;
};

// Oracle grid search: the grid point minimizing the mean evaluation loss over
// trials_tune fresh datasets (train folds in csv mode). Ties break toward the
// smaller zeta, then smaller gamma/c/mta_gamma. Tune and eval trial streams
// use disjoint seed derivations.
TuneResult tune(const ExperimentConfig& config);

// Fresh trials_eval datasets evaluated at fixed parameters (tuned here unless
// provided). NE is always evaluated as the baseline.
BenchReport run_benchmark(const ExperimentConfig& config,
                          const TuneResult* fixed_params = nullptr);

void write_report_csv(const std::string& path, const BenchReport& report);
void write_sweep_csv(const std::string& path, const std::string& variable,
                     const std::vector<std::pair<double, BenchReport>>& results);
std::vector<std::pair<double, BenchReport>> run_sweep(const ExperimentConfig& config);

// Seed of one tuning or evaluation trial; tune and eval streams are disjoint.
std::uint64_t bench_trial_seed(const ExperimentConfig& config, bool tune_phase, int trial);

namespace bench_detail {

struct TrialBags {
    std::vector<Bag> train;
    std::vector<Bag> refs;
};

// Toy-generator trial as used by the benchmark: train bags plus one
// independent reference bag per task.
TrialBags make_toy_trial_bags(const ExperimentConfig& config, std::uint64_t seed);

// Kernel-space aggregates of one trial: only O(B^2) sums are kept.
struct KmeAggregates {
    std::vector<double> sizes;        // N_i
    Eigen::MatrixXd full_sum;         // bag-pair full Gram block sums
    Eigen::VectorXd diag_sum;         // within-bag Gram diagonal sums
    Eigen::MatrixXd khat;             // plug-in <muhat_i, muhat_j>
    Eigen::MatrixXd ustat;            // pairwise MMD U-statistics
    Eigen::VectorXd sigma2;           // per-bag unbiased MSE estimates
    Eigen::MatrixXd cross;            // cross(a, i) = <muhat_a, muhat(ref_i)>
    Eigen::VectorXd ref_offdiag;      // per-ref off-diagonal Gram mean
};

KmeAggregates compute_kme_aggregates(const std::vector<Bag>& train,
                                     const std::vector<Bag>& refs,
                                     const KernelSpec& kernel);

}  // namespace bench_detail

}  // namespace mtavg
