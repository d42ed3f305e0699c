#include "mtavg/bench.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mtavg/io.hpp"
#include "mtavg/parallel.hpp"
#include "mtavg/rng.hpp"

namespace mtavg {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTunePhase = 101;
constexpr std::uint64_t kEvalPhase = 202;

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::uint64_t phase, int trial) {
    return Rng::stream_seed(cfg.seed, phase, static_cast<std::uint64_t>(trial), 0);
}

std::vector<double> linspace_grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    return out;
}

std::vector<double> pow2_grid(int lo, int hi) {
    std::vector<double> out;
    for (int k = lo; k <= hi; ++k) out.push_back(std::pow(2.0, k));
    return out;
}

// ---------------------------------------------------------------------------
// parameter grids

struct MethodGrid {
    Method method;
    std::vector<Params> points;  // ordered for tie-breaking
};

bool method_uses_zeta(Method m) {
    return m == Method::stb0 || m == Method::stb_weight || m == Method::stb_theory ||
           m == Method::mta_stb;
}

std::vector<Params> grid_points(Method m, const Grids& raw_grids,
                                const std::vector<double>* zeta_override) {
    // ascending order so argmin ties resolve toward the smaller parameter
    Grids grids = raw_grids;
    std::sort(grids.zeta.begin(), grids.zeta.end());
    std::sort(grids.gamma.begin(), grids.gamma.end());
    std::sort(grids.c.begin(), grids.c.end());
    std::sort(grids.mta_gamma.begin(), grids.mta_gamma.end());
    std::vector<double> zetas;
    if (method_uses_zeta(m))
        zetas = zeta_override ? *zeta_override : grids.zeta;
    std::vector<Params> out;
    auto push = [&out](Params p) { out.push_back(std::move(p)); };
    switch (m) {
        case Method::ne:
        case Method::rkmse:
        case Method::pp_james_stein: push({}); break;
        case Method::stb0:
            for (double z : zetas) push({{"zeta", z}});
            break;
        case Method::stb_weight:
            for (double z : zetas)
                for (double g : grids.gamma) push({{"zeta", z}, {"gamma", g}});
            break;
        case Method::stb_theory:
            for (double z : zetas)
                for (double c : grids.c) push({{"zeta", z}, {"c", c}});
            break;
        case Method::mta_const:
            for (double g : grids.mta_gamma) push({{"mta_gamma", g}});
            break;
        case Method::mta_stb:
            for (double z : zetas)
                for (double g : grids.mta_gamma) push({{"zeta", z}, {"mta_gamma", g}});
            break;
    }
    if (out.empty()) throw std::invalid_argument("empty parameter grid for " + method_name(m));
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian-setting trial: one observation per task, exact losses to the known
// means. All method losses reduce to O(B^2)/O(B d) algebra on
// G = X X^T and P = X M^T.

struct GaussianTrial {
    int B = 0;
    int d = 0;
    double sb2 = 0.0;  // sigma_bar^2 = d / N with N = 1
    Eigen::MatrixXd means, x;
    Eigen::MatrixXd g, p, d2;
    Eigen::VectorXd xnorm, mnorm;
    Eigen::VectorXd ne_task;  // per-task NE loss
    double a_const = 0.0;     // mean pairwise plug-in squared distance
    std::vector<std::vector<int>> order;  // per-row neighbor order by distance

    explicit GaussianTrial(const GaussianModel& model) {
        GaussianData data = gen_gaussian(model);
        means = std::move(data.means);
        x = std::move(data.observations);
        B = static_cast<int>(x.rows());
        d = static_cast<int>(x.cols());
        sb2 = static_cast<double>(d);
        g.noalias() = x * x.transpose();
        p.noalias() = x * means.transpose();
        xnorm = g.diagonal();
        mnorm = means.rowwise().squaredNorm();
        d2 = (-2.0 * g);
        d2.colwise() += xnorm;
        d2.rowwise() += xnorm.transpose();
        d2 = d2.cwiseMax(0.0);
        d2.diagonal().setZero();
        ne_task = xnorm - 2.0 * p.diagonal() + mnorm;
        a_const = (d2.sum()) / (double(B) * double(B - 1));
        order.assign(static_cast<std::size_t>(B), {});
        for (int i = 0; i < B; ++i) {
            auto& row = order[static_cast<std::size_t>(i)];
            row.resize(static_cast<std::size_t>(B));
            std::iota(row.begin(), row.end(), 0);
            Eigen::VectorXd dr = d2.row(i);
            std::sort(row.begin(), row.end(),
                      [&dr](int a, int b) { return dr(a) < dr(b) || (dr(a) == dr(b) && a < b); });
        }
    }

    double threshold(double zeta) const { return zeta * sb2; }  // zeta * d / N, N = 1
};

// Incremental neighborhoods over an ascending threshold sequence; maintains
// the per-task sums needed for the shrinkage-loss quadratics.
class GaussianNeighborSweep {
public:
    explicit GaussianNeighborSweep(const GaussianTrial& t)
        : t_(t),
          pos_(static_cast<std::size_t>(t.B), 0),
          members_(static_cast<std::size_t>(t.B)),
          sg_(Eigen::VectorXd::Zero(t.B)),
          sp_(Eigen::VectorXd::Zero(t.B)),
          q_(Eigen::VectorXd::Zero(t.B)),
          v_(Eigen::VectorXi::Zero(t.B)) {}

    void advance(double threshold) {
        const int b = t_.B;
        for (int i = 0; i < b; ++i) {
            auto& row = t_.order[static_cast<std::size_t>(i)];
            auto& mem = members_[static_cast<std::size_t>(i)];
            std::size_t& pos = pos_[static_cast<std::size_t>(i)];
            while (pos < row.size() && t_.d2(i, row[pos]) <= threshold) {
                const int j = row[pos];
                double cross = 0.0;
                for (int l : mem) cross += t_.g(j, l);
                q_(i) += t_.g(j, j) + 2.0 * cross;
                sg_(i) += t_.g(i, j);
                sp_(i) += t_.p(j, i);
                mem.push_back(j);
                ++pos;
            }
            v_(i) = static_cast<int>(mem.size());
        }
    }

    // per-task coefficients of loss(gamma) = g^2 a + 2 g (1-g) b + (1-g)^2 c
    void quadratics(Eigen::VectorXd& a, Eigen::VectorXd& b, Eigen::VectorXd& c) const {
        const int n = t_.B;
        a = t_.ne_task;
        b.resize(n);
        c.resize(n);
        for (int i = 0; i < n; ++i) {
            const double v = static_cast<double>(v_(i));
            b(i) = sg_(i) / v - t_.p(i, i) - sp_(i) / v + t_.mnorm(i);
            c(i) = q_(i) / (v * v) - 2.0 * sp_(i) / v + t_.mnorm(i);
        }
    }

    const Eigen::VectorXi& counts() const { return v_; }
    const std::vector<std::vector<int>>& members() const { return members_; }

    Eigen::MatrixXd adjacency() const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(t_.B, t_.B);
        for (int i = 0; i < t_.B; ++i)
            for (int j : members_[static_cast<std::size_t>(i)]) a(i, j) = 1.0;
        return a;
    }

private:
    const GaussianTrial& t_;
    std::vector<std::size_t> pos_;
    std::vector<std::vector<int>> members_;
    Eigen::VectorXd sg_, sp_, q_;
    Eigen::VectorXi v_;
};

// losses over a method grid; grid points must be ordered (zeta ascending)
Eigen::VectorXd gaussian_curve(const GaussianTrial& t, Method m,
                               const std::vector<Params>& grid) {
    const int n_points = static_cast<int>(grid.size());
    Eigen::VectorXd out(n_points);
    switch (m) {
        case Method::ne: {
            out.setConstant(t.ne_task.mean());
            return out;
        }
        case Method::pp_james_stein: {
            double acc = 0.0;
            for (int i = 0; i < t.B; ++i) {
                const double norm2 = t.xnorm(i);
                double f = 0.0;
                if (norm2 > 0.0)
                    f = std::max(0.0, 1.0 - (double(t.d) - 2.0) / norm2);  // sigma2 = 1
                acc += f * f * t.xnorm(i) - 2.0 * f * t.p(i, i) + t.mnorm(i);
            }
            out.setConstant(acc / t.B);
            return out;
        }
        case Method::rkmse:
            throw std::invalid_argument("rkmse is undefined with one sample per bag");
        case Method::mta_const: {
            // analytic path: W x = xbar + (x - xbar) / (1 + gamma sb2 a)
            Eigen::RowVectorXd xbar = t.x.colwise().mean();
            Eigen::RowVectorXd residual_target;  // placeholder
            Eigen::VectorXd pq(t.B), qq(t.B), rq(t.B);
            for (int i = 0; i < t.B; ++i) {
                Eigen::RowVectorXd dx = t.x.row(i) - xbar;
                Eigen::RowVectorXd dm = xbar - t.means.row(i);
                pq(i) = dx.squaredNorm();
                qq(i) = dx.dot(dm);
                rq(i) = dm.squaredNorm();
            }
            for (int k = 0; k < n_points; ++k) {
                const double gamma = grid[static_cast<std::size_t>(k)].at("mta_gamma");
                const double s = 1.0 / (1.0 + gamma * t.sb2 * t.a_const);
                out(k) = (s * s * pq.array() + 2.0 * s * qq.array() + rq.array()).mean();
            }
            return out;
        }
        case Method::stb0:
        case Method::stb_weight:
        case Method::stb_theory: {
            GaussianNeighborSweep sweep(t);
            Eigen::VectorXd a, b, c;
            double last_zeta = -1.0;
            bool have = false;
            for (int k = 0; k < n_points; ++k) {
                const Params& p = grid[static_cast<std::size_t>(k)];
                const double zeta = p.at("zeta");
                if (!have || zeta != last_zeta) {
                    if (have && zeta < last_zeta)
                        throw std::logic_error("zeta grid must be ascending");
                    sweep.advance(t.threshold(zeta));
                    sweep.quadratics(a, b, c);
                    last_zeta = zeta;
                    have = true;
                }
                if (m == Method::stb0) {
                    out(k) = c.mean();
                } else if (m == Method::stb_weight) {
                    const double g = p.at("gamma");
                    out(k) = (g * g * a.array() + 2.0 * g * (1.0 - g) * b.array() +
                              (1.0 - g) * (1.0 - g) * c.array())
                                 .mean();
                } else {
                    const double tau_hat = p.at("c") * zeta;
                    double acc = 0.0;
                    for (int i = 0; i < t.B; ++i) {
                        const double g = stb_theory_gamma(tau_hat, sweep.counts()(i) - 1);
                        acc += g * g * a(i) + 2.0 * g * (1.0 - g) * b(i) +
                               (1.0 - g) * (1.0 - g) * c(i);
                    }
                    out(k) = acc / t.B;
                }
            }
            return out;
        }
        case Method::mta_stb: {
            // group by zeta; per zeta either a one-shot dense solve (single
            // gamma) or an eigendecomposition that makes the gamma sweep free
            GaussianNeighborSweep sweep(t);
            double last_zeta = -1.0;
            bool have = false;
            Eigen::MatrixXd adj;
            std::vector<int> idx_for_zeta;
            int k = 0;
            while (k < n_points) {
                const double zeta = grid[static_cast<std::size_t>(k)].at("zeta");
                int k_end = k;
                while (k_end < n_points &&
                       grid[static_cast<std::size_t>(k_end)].at("zeta") == zeta)
                    ++k_end;
                if (!have || zeta != last_zeta) {
                    sweep.advance(t.threshold(zeta));
                    adj = sweep.adjacency();
                    last_zeta = zeta;
                    have = true;
                }
                const int n_gammas = k_end - k;
                if (n_gammas == 1) {
                    const double gamma = grid[static_cast<std::size_t>(k)].at("mta_gamma");
                    Eigen::MatrixXd w = mta_weight_matrix(
                        Eigen::VectorXd::Constant(t.B, t.sb2), adj, gamma);
                    out(k) = ((w * t.x - t.means).rowwise().squaredNorm()).mean();
                } else {
                    // L(A) is symmetric here (Gaussian tests are symmetric)
                    Eigen::MatrixXd lap = -adj;
                    lap.diagonal() += adj.rowwise().sum();
                    lap *= t.sb2 / static_cast<double>(t.B);
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
                    const Eigen::VectorXd lam = es.eigenvalues();
                    Eigen::MatrixXd xt = es.eigenvectors().transpose() * t.x;
                    Eigen::MatrixXd mt = es.eigenvectors().transpose() * t.means;
                    Eigen::VectorXd gg = xt.rowwise().squaredNorm();
                    Eigen::VectorXd hh = (xt.array() * mt.array()).rowwise().sum();
                    Eigen::VectorXd mm = mt.rowwise().squaredNorm();
                    for (int kk = k; kk < k_end; ++kk) {
                        const double gamma =
                            grid[static_cast<std::size_t>(kk)].at("mta_gamma");
                        Eigen::ArrayXd f = 1.0 / (1.0 + gamma * lam.array());
                        out(kk) =
                            (f.square() * gg.array() - 2.0 * f * hh.array() + mm.array())
                                .sum() /
                            t.B;
                    }
                }
                k = k_end;
            }
            return out;
        }
    }
    throw std::logic_error("unhandled method");
}

// ---------------------------------------------------------------------------
// Kernel-setting trial (toy generator or csv bags): losses are the unbiased
// squared-distance estimates against independent reference bags, computed
// from O(B^2) Gram aggregates.

struct KmeTrial {
    bench_detail::KmeAggregates agg;
    int B = 0;

    KmeTrial(const std::vector<Bag>& train, const std::vector<Bag>& refs,
             const KernelSpec& kernel)
        : agg(bench_detail::compute_kme_aggregates(train, refs, kernel)),
          B(static_cast<int>(train.size())) {}

    // mean loss of a dense weight matrix
    double dense_loss(const Eigen::MatrixXd& w) const {
        Eigen::VectorXd quad = ((w * agg.khat).cwiseProduct(w)).rowwise().sum();
        // diag(W * cross) without the full product
        Eigen::VectorXd cross = (w.cwiseProduct(agg.cross.transpose())).rowwise().sum();
        return (quad - 2.0 * cross + agg.ref_offdiag).mean();
    }
};

Eigen::VectorXd kme_curve(const KmeTrial& t, Method m, const std::vector<Params>& grid) {
    const int n_points = static_cast<int>(grid.size());
    const int B = t.B;
    Eigen::VectorXd out(n_points);
    const auto& agg = t.agg;

    switch (m) {
        case Method::ne: {
            double acc = 0.0;
            for (int i = 0; i < B; ++i)
                acc += agg.khat(i, i) - 2.0 * agg.cross(i, i) + agg.ref_offdiag(i);
            out.setConstant(acc / B);
            return out;
        }
        case Method::rkmse: {
            double acc = 0.0;
            for (int i = 0; i < B; ++i) {
                const double n = agg.sizes[static_cast<std::size_t>(i)];
                const double w = rkmse_diagonal_weight(agg.diag_sum(i) / n,
                                                       agg.full_sum(i, i) / (n * n), n);
                acc += w * w * agg.khat(i, i) - 2.0 * w * agg.cross(i, i) +
                       agg.ref_offdiag(i);
            }
            out.setConstant(acc / B);
            return out;
        }
        case Method::pp_james_stein:
            throw std::invalid_argument(
                "pp_james_stein needs explicit mean vectors (gaussian mode only)");
        case Method::stb0:
        case Method::stb_weight:
        case Method::stb_theory: {
            double last_zeta = -1.0;
            bool have = false;
            // per-task pieces of the loss quadratic in gamma
            Eigen::VectorXd kii(B), kiu(B), kuu(B), ci(B), cu(B);
            Eigen::VectorXi counts(B);
            for (int k = 0; k < n_points; ++k) {
                const Params& p = grid[static_cast<std::size_t>(k)];
                const double zeta = p.at("zeta");
                if (!have || zeta != last_zeta) {
                    NeighborGraph graph = graph_from_ustats(agg.ustat, agg.sigma2, zeta);
                    for (int i = 0; i < B; ++i) {
                        double su = 0.0, suu = 0.0, scu = 0.0;
                        int v = 0;
                        for (int j = 0; j < B; ++j) {
                            if (!graph.edge(i, j)) continue;
                            ++v;
                            su += agg.khat(i, j);
                            scu += agg.cross(j, i);
                            for (int l = 0; l < B; ++l)
                                if (graph.edge(i, l)) suu += agg.khat(j, l);
                        }
                        counts(i) = v;
                        kii(i) = agg.khat(i, i);
                        kiu(i) = su / v;
                        kuu(i) = suu / (double(v) * double(v));
                        ci(i) = agg.cross(i, i);
                        cu(i) = scu / v;
                    }
                    last_zeta = zeta;
                    have = true;
                }
                auto loss_gamma = [&](auto gamma_of_task) {
                    double acc = 0.0;
                    for (int i = 0; i < B; ++i) {
                        const double g = gamma_of_task(i);
                        const double quad = g * g * kii(i) + 2.0 * g * (1.0 - g) * kiu(i) +
                                            (1.0 - g) * (1.0 - g) * kuu(i);
                        const double cross = g * ci(i) + (1.0 - g) * cu(i);
                        acc += quad - 2.0 * cross + agg.ref_offdiag(i);
                    }
                    return acc / B;
                };
                if (m == Method::stb0) {
                    out(k) = loss_gamma([](int) { return 0.0; });
                } else if (m == Method::stb_weight) {
                    const double g = p.at("gamma");
                    out(k) = loss_gamma([g](int) { return g; });
                } else {
                    const double tau_hat = p.at("c") * zeta;
                    out(k) = loss_gamma([&](int i) {
                        return stb_theory_gamma(tau_hat, counts(i) - 1);
                    });
                }
            }
            return out;
        }
        case Method::mta_const:
        case Method::mta_stb: {
            Eigen::VectorXd mse = agg.sigma2;
            double last_zeta = -1.0;
            bool have = false;
            Eigen::MatrixXd similarity;
            if (m == Method::mta_const) {
                double a = 0.0;
                for (int i = 0; i < B; ++i)
                    for (int j = 0; j < B; ++j)
                        if (i != j)
                            a += agg.khat(i, i) - 2.0 * agg.khat(i, j) + agg.khat(j, j);
                a /= double(B) * double(B - 1);
                similarity = Eigen::MatrixXd::Constant(B, B, a);
                have = true;
            }
            for (int k = 0; k < n_points; ++k) {
                const Params& p = grid[static_cast<std::size_t>(k)];
                if (m == Method::mta_stb) {
                    const double zeta = p.at("zeta");
                    if (!have || zeta != last_zeta) {
                        similarity =
                            graph_from_ustats(agg.ustat, agg.sigma2, zeta).adj.cast<double>();
                        last_zeta = zeta;
                        have = true;
                    }
                }
                const double gamma = p.at("mta_gamma");
                Eigen::MatrixXd w = mta_weight_matrix(mse, similarity, gamma);
                out(k) = t.dense_loss(w);
            }
            return out;
        }
    }
    throw std::logic_error("unhandled method");
}

// ---------------------------------------------------------------------------
// trial construction per mode

using KmeTrialInputs = bench_detail::TrialBags;

// csv mode: subsample each bag, keep the complete bag as its reference proxy
KmeTrialInputs make_csv_trial(const std::vector<Bag>& all, const std::vector<int>& fold,
                              int subsample_n, std::uint64_t seed) {
    KmeTrialInputs out;
    out.train.reserve(fold.size());
    out.refs.reserve(fold.size());
    for (std::size_t k = 0; k < fold.size(); ++k) {
        const Bag& bag = all[static_cast<std::size_t>(fold[k])];
        out.train.push_back(
            subsample(bag, subsample_n, Rng::stream_seed(seed, 11, k, 0)));
        out.refs.push_back(bag);
    }
    return out;
}

std::vector<int> csv_fold(int total, double train_fraction, std::uint64_t seed, bool train) {
    std::vector<int> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed, 12);
    for (int k = total - 1; k > 0; --k) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(k + 1)));
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
    }
    const int n_train = std::max(1, std::min(total - 1,
                                             static_cast<int>(std::lround(train_fraction * total))));
    std::vector<int> fold;
    if (train)
        fold.assign(idx.begin(), idx.begin() + n_train);
    else
        fold.assign(idx.begin() + n_train, idx.end());
    std::sort(fold.begin(), fold.end());
    return fold;
}

KernelSpec trial_kernel(const ExperimentConfig& cfg, const std::vector<Bag>& train) {
    if (!cfg.kernel_width_auto || cfg.kernel.kind == KernelKind::linear) return cfg.kernel;
    return KernelSpec::rbf(average_feature_stddev(train));
}

// evaluates all requested method grids on one trial
void run_trial_curves(const ExperimentConfig& cfg, const std::vector<Bag>* csv_bags,
                      std::uint64_t phase, int trial,
                      const std::vector<MethodGrid>& grids,
                      std::vector<Eigen::VectorXd>& curves_out) {
    const std::uint64_t seed = trial_seed(cfg, phase, trial);
    curves_out.resize(grids.size());
    if (cfg.mode == BenchMode::gaussian) {
        GaussianModel model = cfg.gmodel;
        model.seed = seed;
        GaussianTrial t(model);
        for (std::size_t m = 0; m < grids.size(); ++m)
            curves_out[m] = gaussian_curve(t, grids[m].method, grids[m].points);
        return;
    }
    KmeTrialInputs inputs;
    if (cfg.mode == BenchMode::kme_toy) {
        inputs = bench_detail::make_toy_trial_bags(cfg, seed);
    } else {
        const bool train_fold = phase == kTunePhase;
        std::vector<int> fold = csv_fold(static_cast<int>(csv_bags->size()),
                                         cfg.train_fraction, seed, train_fold);
        inputs = make_csv_trial(*csv_bags, fold, cfg.subsample_n, seed);
    }
    KernelSpec kernel = trial_kernel(cfg, inputs.train);
    KmeTrial t(inputs.train, inputs.refs, kernel);
    for (std::size_t m = 0; m < grids.size(); ++m)
        curves_out[m] = kme_curve(t, grids[m].method, grids[m].points);
}

std::vector<Bag> load_csv_input(const ExperimentConfig& cfg) {
    std::vector<Bag> bags = load_bags_csv(cfg.input_csv);
    standardize(bags);
    return bags;
}

void validate_methods(const ExperimentConfig& cfg) {
    for (Method m : cfg.methods) {
        if (cfg.mode == BenchMode::gaussian && m == Method::rkmse)
            throw std::invalid_argument("rkmse is undefined in gaussian mode (one sample per bag)");
        if (cfg.mode != BenchMode::gaussian && m == Method::pp_james_stein)
            throw std::invalid_argument("pp_james_stein is only available in gaussian mode");
    }
}

std::vector<Method> methods_with_baseline(const ExperimentConfig& cfg) {
    std::vector<Method> out;
    out.push_back(Method::ne);
    for (Method m : cfg.methods)
        if (m != Method::ne) out.push_back(m);
    return out;
}

int effective_threads(const ExperimentConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : hardware_threads();
}

Params select_best(const MethodGrid& grid, const Eigen::VectorXd& mean_curve) {
    int best = 0;
    for (int k = 1; k < mean_curve.size(); ++k)
        if (mean_curve(k) < mean_curve(best)) best = k;  // ties keep the earlier point
    return grid.points[static_cast<std::size_t>(best)];
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t bench_trial_seed(const ExperimentConfig& cfg, bool tune_phase, int trial) {
    return trial_seed(cfg, tune_phase ? kTunePhase : kEvalPhase, trial);
}

namespace bench_detail {

TrialBags make_toy_trial_bags(const ExperimentConfig& cfg, std::uint64_t seed) {
    TrialBags out;
    ToyData data = gen_toy(cfg.toy, seed);
    out.train = std::move(data.bags);
    out.refs.reserve(data.tasks.size());
    for (std::size_t i = 0; i < data.tasks.size(); ++i) {
        out.refs.push_back(sample_toy_bag(data.tasks[i], cfg.ref_bag_size, seed,
                                          (1ULL << 32) + i, "ref_" + std::to_string(i)));
    }
    return out;
}

}  // namespace bench_detail

std::string bench_mode_name(BenchMode m) {
    switch (m) {
        case BenchMode::gaussian: return "gaussian";
        case BenchMode::kme_toy: return "kme_toy";
        case BenchMode::kme_csv: return "kme_csv";
    }
    throw std::logic_error("unknown mode");
}

BenchMode bench_mode_from_name(const std::string& name) {
    for (BenchMode m : {BenchMode::gaussian, BenchMode::kme_toy, BenchMode::kme_csv})
        if (bench_mode_name(m) == name) return m;
    throw std::invalid_argument("unknown mode '" + name + "'");
}

std::string params_json(const Params& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j.dump();
}

ExperimentConfig default_toy_config(ToyKind kind) {
    ExperimentConfig cfg;
    cfg.mode = BenchMode::kme_toy;
    cfg.toy.kind = kind;
    cfg.toy.B = kind == ToyKind::num_bags ? 300 : 50;
    cfg.toy.N = 50;
    cfg.toy.radius = kind == ToyKind::clustered ? 2.5 : 0.0;
    cfg.kernel = KernelSpec::rbf(1.0);
    cfg.kernel_width_auto = true;
    cfg.methods = {Method::ne,         Method::rkmse,      Method::stb0,
                   Method::stb_theory, Method::stb_weight, Method::mta_const,
                   Method::mta_stb};
    cfg.grids.zeta = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0};
    cfg.grids.gamma = linspace_grid(0.0, 1.0, 0.1);
    cfg.grids.c = {0.25, 0.5, 1.0, 2.0, 4.0};
    cfg.grids.mta_gamma = pow2_grid(-6, 8);
    cfg.trials_tune = 100;
    cfg.trials_eval = 200;
    cfg.ref_bag_size = 1000;
    cfg.zeta_protocol = ZetaProtocol::per_method;
    return cfg;
}

ExperimentConfig default_gaussian_config(GaussianModelKind kind) {
    ExperimentConfig cfg;
    cfg.mode = BenchMode::gaussian;
    cfg.gmodel.kind = kind;
    cfg.gmodel.B = 2000;
    cfg.gmodel.d = 0;
    cfg.methods = {Method::ne,       Method::pp_james_stein, Method::mta_const,
                   Method::mta_stb,  Method::stb0,           Method::stb_theory,
                   Method::stb_weight};
    // the test statistic concentrates near (2 + tau) sigma_bar^2; sparse means
    // live at much larger tau because of the low ambient dimension
    if (kind == GaussianModelKind::sparse)
        cfg.grids.zeta = linspace_grid(2.0, 9.0, 0.25);
    else
        cfg.grids.zeta = linspace_grid(2.0, 4.0, 0.05);
    cfg.grids.gamma = linspace_grid(0.0, 1.0, 0.05);
    cfg.grids.c = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0};
    cfg.grids.mta_gamma = pow2_grid(-40, 10);
    cfg.trials_tune = 3;
    cfg.trials_eval = 20;
    cfg.zeta_protocol = ZetaProtocol::stb0_shared;
    return cfg;
}

TuneResult tune(const ExperimentConfig& cfg) {
    validate_methods(cfg);
    const int threads = effective_threads(cfg);
    std::vector<Bag> csv_bags;
    if (cfg.mode == BenchMode::kme_csv) csv_bags = load_csv_input(cfg);

    TuneResult result;
    std::vector<Method> methods = methods_with_baseline(cfg);

    auto run_pass = [&](const std::vector<MethodGrid>& grids) {
        std::vector<std::vector<Eigen::VectorXd>> per_trial(
            static_cast<std::size_t>(cfg.trials_tune));
        parallel_for(cfg.trials_tune, threads, [&](std::int64_t trial) {
            run_trial_curves(cfg, cfg.mode == BenchMode::kme_csv ? &csv_bags : nullptr,
                             kTunePhase, static_cast<int>(trial), grids,
                             per_trial[static_cast<std::size_t>(trial)]);
        });
        // deterministic reduction in trial order
        std::vector<Eigen::VectorXd> mean(grids.size());
        for (std::size_t m = 0; m < grids.size(); ++m) {
            mean[m] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grids[m].points.size()));
            for (int trial = 0; trial < cfg.trials_tune; ++trial)
                mean[m] += per_trial[static_cast<std::size_t>(trial)][m];
            mean[m] /= static_cast<double>(cfg.trials_tune);
        }
        for (std::size_t m = 0; m < grids.size(); ++m)
            result[grids[m].method] = select_best(grids[m], mean[m]);
    };

    if (cfg.zeta_protocol == ZetaProtocol::stb0_shared) {
        // pass 1: the test threshold from the plain neighborhood average
        bool any_zeta = false;
        for (Method m : methods) any_zeta = any_zeta || method_uses_zeta(m);
        std::vector<double> shared_zeta;
        if (any_zeta) {
            std::vector<MethodGrid> pass1{{Method::stb0, grid_points(Method::stb0, cfg.grids, nullptr)}};
            run_pass(pass1);
            shared_zeta = {result[Method::stb0].at("zeta")};
        }
        // pass 2: remaining shrinkage parameters with zeta held fixed
        std::vector<MethodGrid> pass2;
        for (Method m : methods) {
            if (m == Method::stb0) continue;
            pass2.push_back({m, grid_points(m, cfg.grids,
                                            method_uses_zeta(m) ? &shared_zeta : nullptr)});
        }
        if (!pass2.empty()) run_pass(pass2);
    } else {
        std::vector<MethodGrid> pass;
        for (Method m : methods) pass.push_back({m, grid_points(m, cfg.grids, nullptr)});
        run_pass(pass);
    }
    return result;
}

const MethodResult& BenchReport::row(Method m) const {
    for (const MethodResult& r : rows)
        if (r.method == m) return r;
    throw std::out_of_range("method not in report: " + method_name(m));
}

BenchReport run_benchmark(const ExperimentConfig& cfg, const TuneResult* fixed_params) {
    validate_methods(cfg);
    const int threads = effective_threads(cfg);
    TuneResult params = fixed_params ? *fixed_params : tune(cfg);

    std::vector<Bag> csv_bags;
    if (cfg.mode == BenchMode::kme_csv) csv_bags = load_csv_input(cfg);

    std::vector<Method> methods = methods_with_baseline(cfg);
    std::vector<MethodGrid> grids;
    for (Method m : methods) {
        auto it = params.find(m);
        if (it == params.end())
            throw std::invalid_argument("no tuned parameters for " + method_name(m));
        grids.push_back({m, {it->second}});
    }

    Eigen::MatrixXd losses(cfg.trials_eval, static_cast<Eigen::Index>(methods.size()));
    std::vector<std::vector<Eigen::VectorXd>> per_trial(
        static_cast<std::size_t>(cfg.trials_eval));
    parallel_for(cfg.trials_eval, threads, [&](std::int64_t trial) {
        run_trial_curves(cfg, cfg.mode == BenchMode::kme_csv ? &csv_bags : nullptr,
                         kEvalPhase, static_cast<int>(trial), grids,
                         per_trial[static_cast<std::size_t>(trial)]);
    });
    for (int trial = 0; trial < cfg.trials_eval; ++trial)
        for (std::size_t m = 0; m < methods.size(); ++m)
            losses(trial, static_cast<Eigen::Index>(m)) =
                per_trial[static_cast<std::size_t>(trial)][m](0);

    BenchReport report;
    report.trial_losses = losses;
    const double ne_mean = losses.col(0).mean();
    for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodResult row;
        row.method = methods[m];
        row.params = params.at(methods[m]);
        const auto col = losses.col(static_cast<Eigen::Index>(m));
        row.mean_loss = col.mean();
        const double var =
            (col.array() - row.mean_loss).square().sum() / std::max(1, cfg.trials_eval - 1);
        row.stderr_ = std::sqrt(var / cfg.trials_eval);
        row.pct_decrease = 100.0 * (1.0 - row.mean_loss / ne_mean);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<std::pair<double, BenchReport>> run_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep_variable.empty())
        throw std::invalid_argument("config has no sweep variable");
    if (cfg.mode != BenchMode::kme_toy)
        throw std::invalid_argument("sweeps are defined for the toy generator");
    std::vector<std::pair<double, BenchReport>> out;
    for (double value : cfg.sweep_values) {
        ExperimentConfig point = cfg;
        point.sweep_variable.clear();
        if (cfg.sweep_variable == "N")
            point.toy.N = static_cast<int>(std::lround(value));
        else if (cfg.sweep_variable == "B")
            point.toy.B = static_cast<int>(std::lround(value));
        else if (cfg.sweep_variable == "radius")
            point.toy.radius = value;
        else
            throw std::invalid_argument("unknown sweep variable '" + cfg.sweep_variable + "'");
        out.emplace_back(value, run_benchmark(point));
    }
    return out;
}

void write_report_csv(const std::string& path, const BenchReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "method,param_json,mean_loss,stderr,pct_decrease\n";
    char buf[64];
    for (const MethodResult& r : report.rows) {
        out << method_name(r.method) << ",\"" << params_json(r.params) << "\"";
        std::snprintf(buf, sizeof(buf), ",%.12g", r.mean_loss);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.12g", r.stderr_);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.12g", r.pct_decrease);
        out << buf << "\n";
    }
}

void write_sweep_csv(const std::string& path, const std::string& variable,
                     const std::vector<std::pair<double, BenchReport>>& results) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "sweep_variable,sweep_value,method,param_json,mean_loss,stderr,pct_decrease\n";
    char buf[64];
    for (const auto& [value, report] : results) {
        for (const MethodResult& r : report.rows) {
            out << variable;
            std::snprintf(buf, sizeof(buf), ",%.12g,", value);
            out << buf << method_name(r.method) << ",\"" << params_json(r.params) << "\"";
            std::snprintf(buf, sizeof(buf), ",%.12g", r.mean_loss);
            out << buf;
            std::snprintf(buf, sizeof(buf), ",%.12g", r.stderr_);
            out << buf;
            std::snprintf(buf, sizeof(buf), ",%.12g", r.pct_decrease);
            out << buf << "\n";
        }
    }
}

// ---------------------------------------------------------------------------
// config / params serialization

namespace {

Grids grids_from_json(const json& j, const Grids& defaults) {
    Grids g = defaults;
    if (!j.contains("grids")) return g;
    const json& jg = j.at("grids");
    auto read = [&jg](const char* key, std::vector<double>& into) {
        if (jg.contains(key)) into = jg.at(key).get<std::vector<double>>();
    };
    read("zeta", g.zeta);
    read("gamma", g.gamma);
    read("c", g.c);
    read("mta_gamma", g.mta_gamma);
    return g;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    const BenchMode mode = bench_mode_from_name(j.at("mode").get<std::string>());

    ExperimentConfig cfg;
    if (mode == BenchMode::gaussian) {
        cfg = default_gaussian_config(
            gaussian_model_from_name(j.at("model").get<std::string>()));
        if (j.contains("B")) cfg.gmodel.B = j.at("B").get<int>();
        if (j.contains("d")) cfg.gmodel.d = j.at("d").get<int>();
    } else if (mode == BenchMode::kme_toy) {
        cfg = default_toy_config(toy_kind_from_name(j.at("setup").get<std::string>()));
        if (j.contains("B")) cfg.toy.B = j.at("B").get<int>();
        if (j.contains("N")) cfg.toy.N = j.at("N").get<int>();
        if (j.contains("radius")) cfg.toy.radius = j.at("radius").get<double>();
    } else {
        cfg = default_toy_config(ToyKind::num_bags);
        cfg.mode = BenchMode::kme_csv;
        cfg.input_csv = j.at("input_csv").get<std::string>();
        cfg.kernel = KernelSpec::rbf(1.0);
        cfg.kernel_width_auto = false;  // width fixed to 1 unless overridden
        if (j.contains("subsample")) cfg.subsample_n = j.at("subsample").get<int>();
        if (j.contains("train_fraction"))
            cfg.train_fraction = j.at("train_fraction").get<double>();
        cfg.trials_tune = 100;
        cfg.trials_eval = 100;
    }
    if (j.contains("kernel")) {
        const std::string kind = j.at("kernel").get<std::string>();
        if (kind == "linear") {
            cfg.kernel = KernelSpec::linear();
            cfg.kernel_width_auto = false;
        } else if (kind == "rbf") {
            cfg.kernel = KernelSpec::rbf(1.0);
        } else {
            throw std::invalid_argument("unknown kernel '" + kind + "'");
        }
    }
    if (j.contains("width")) {
        const double w = j.at("width").get<double>();
        if (w > 0) {
            cfg.kernel = KernelSpec::rbf(w);
            cfg.kernel_width_auto = false;
        } else {
            cfg.kernel_width_auto = true;
        }
    }
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& name : j.at("methods"))
            cfg.methods.push_back(method_from_name(name.get<std::string>()));
    }
    cfg.grids = grids_from_json(j, cfg.grids);
    if (j.contains("trials_tune")) cfg.trials_tune = j.at("trials_tune").get<int>();
    if (j.contains("trials_eval")) cfg.trials_eval = j.at("trials_eval").get<int>();
    if (j.contains("ref_bag_size")) cfg.ref_bag_size = j.at("ref_bag_size").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("zeta_protocol")) {
        const std::string p = j.at("zeta_protocol").get<std::string>();
        if (p == "per_method")
            cfg.zeta_protocol = ZetaProtocol::per_method;
        else if (p == "stb0_shared")
            cfg.zeta_protocol = ZetaProtocol::stb0_shared;
        else
            throw std::invalid_argument("unknown zeta_protocol '" + p + "'");
    }
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("sweep")) {
        cfg.sweep_variable = j.at("sweep").at("variable").get<std::string>();
        cfg.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
    }
    if (cfg.trials_tune < 1 || cfg.trials_eval < 1)
        throw std::invalid_argument("trial counts must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    j["mode"] = bench_mode_name(cfg.mode);
    if (cfg.mode == BenchMode::gaussian) {
        j["model"] = gaussian_model_name(cfg.gmodel.kind);
        j["B"] = cfg.gmodel.B;
        j["d"] = cfg.gmodel.d;
    } else if (cfg.mode == BenchMode::kme_toy) {
        j["setup"] = toy_kind_name(cfg.toy.kind);
        j["B"] = cfg.toy.B;
        j["N"] = cfg.toy.N;
        j["radius"] = cfg.toy.radius;
    } else {
        j["input_csv"] = cfg.input_csv;
        j["subsample"] = cfg.subsample_n;
        j["train_fraction"] = cfg.train_fraction;
    }
    j["kernel"] = cfg.kernel.kind == KernelKind::linear ? "linear" : "rbf";
    j["width"] = cfg.kernel_width_auto ? 0.0 : cfg.kernel.width;
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    j["grids"] = {{"zeta", cfg.grids.zeta},
                  {"gamma", cfg.grids.gamma},
                  {"c", cfg.grids.c},
                  {"mta_gamma", cfg.grids.mta_gamma}};
    j["trials_tune"] = cfg.trials_tune;
    j["trials_eval"] = cfg.trials_eval;
    j["ref_bag_size"] = cfg.ref_bag_size;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["zeta_protocol"] =
        cfg.zeta_protocol == ZetaProtocol::per_method ? "per_method" : "stb0_shared";
    j["output"] = cfg.output;
    if (!cfg.sweep_variable.empty())
        j["sweep"] = {{"variable", cfg.sweep_variable}, {"values", cfg.sweep_values}};
    return j.dump(2);
}

std::string tune_result_json(const TuneResult& r) {
    json j = json::object();
    for (const auto& [method, params] : r) {
        json p = json::object();
        for (const auto& [k, v] : params) p[k] = v;
        j[method_name(method)] = p;
    }
    return j.dump(2);
}

TuneResult tune_result_from_json_text(const std::string& text) {
    json j = json::parse(text);
    TuneResult out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        Params p;
        for (auto pit = it.value().begin(); pit != it.value().end(); ++pit)
            p[pit.key()] = pit.value().get<double>();
        out[method_from_name(it.key())] = p;
    }
    return out;
}

// ---------------------------------------------------------------------------
// kernel aggregates

namespace bench_detail {

namespace {

// segment boundaries of bags packed into one sample matrix
struct Packed {
    Eigen::MatrixXd samples;   // total x d
    std::vector<int> offset;   // bag start rows, size B+1
};

Packed pack(const std::vector<Bag>& bags) {
    Packed out;
    const Eigen::Index d = common_dim(bags);
    Eigen::Index total = 0;
    out.offset.resize(bags.size() + 1);
    for (std::size_t i = 0; i < bags.size(); ++i) {
        out.offset[i] = static_cast<int>(total);
        total += bags[i].size();
    }
    out.offset[bags.size()] = static_cast<int>(total);
    out.samples.resize(total, d);
    for (std::size_t i = 0; i < bags.size(); ++i)
        out.samples.middleRows(out.offset[i], bags[i].size()) = bags[i].samples;
    return out;
}

// kernel block between two packed sample matrices
Eigen::MatrixXd kernel_block(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const KernelSpec& kernel) {
    if (kernel.kind == KernelKind::linear) return a * b.transpose();
    const double scale = -1.0 / (2.0 * kernel.width * kernel.width);
    Eigen::VectorXd an = a.rowwise().squaredNorm();
    Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return (d2.array().max(0.0) * scale).exp().matrix();
}

}  // namespace

KmeAggregates compute_kme_aggregates(const std::vector<Bag>& train,
                                     const std::vector<Bag>& refs,
                                     const KernelSpec& kernel) {
    if (refs.size() != train.size())
        throw std::invalid_argument("one reference bag per train bag required");
    const int B = static_cast<int>(train.size());
    KmeAggregates agg;
    agg.sizes.resize(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        agg.sizes[static_cast<std::size_t>(i)] = static_cast<double>(train[static_cast<std::size_t>(i)].size());
        if (train[static_cast<std::size_t>(i)].size() < 2)
            throw std::invalid_argument("train bags need >= 2 samples");
        if (refs[static_cast<std::size_t>(i)].size() < 2)
            throw std::invalid_argument("reference bags need >= 2 samples");
    }

    Packed tr = pack(train);

    agg.full_sum.setZero(B, B);
    agg.diag_sum.setZero(B);
    if (kernel.kind == KernelKind::linear) {
        // full block sums collapse to inner products of per-bag sums
        Eigen::MatrixXd bag_sums(B, tr.samples.cols());
        for (int i = 0; i < B; ++i)
            bag_sums.row(i) = train[static_cast<std::size_t>(i)].samples.colwise().sum();
        agg.full_sum.noalias() = bag_sums * bag_sums.transpose();
        for (int i = 0; i < B; ++i)
            agg.diag_sum(i) =
                train[static_cast<std::size_t>(i)].samples.rowwise().squaredNorm().sum();
    } else {
        for (int i = 0; i < B; ++i) {
            const int r0 = tr.offset[static_cast<std::size_t>(i)];
            const int rows = tr.offset[static_cast<std::size_t>(i) + 1] - r0;
            const int c0 = r0;
            const int cols = tr.offset.back() - c0;
            Eigen::MatrixXd block = kernel_block(tr.samples.middleRows(r0, rows),
                                                 tr.samples.middleRows(c0, cols), kernel);
            for (int j = i; j < B; ++j) {
                const int b0 = tr.offset[static_cast<std::size_t>(j)] - c0;
                const int bn = tr.offset[static_cast<std::size_t>(j) + 1] -
                               tr.offset[static_cast<std::size_t>(j)];
                const double s = block.middleCols(b0, bn).sum();
                agg.full_sum(i, j) = agg.full_sum(j, i) = s;
            }
            agg.diag_sum(i) = static_cast<double>(rows);  // k(z, z) = 1 for the RBF
        }
    }

    agg.khat.resize(B, B);
    agg.ustat.setZero(B, B);
    agg.sigma2.resize(B);
    for (int i = 0; i < B; ++i) {
        const double ni = agg.sizes[static_cast<std::size_t>(i)];
        agg.sigma2(i) = std::max(
            0.0, (ni * agg.diag_sum(i) - agg.full_sum(i, i)) / (ni * ni * (ni - 1.0)));
        for (int j = 0; j < B; ++j)
            agg.khat(i, j) =
                agg.full_sum(i, j) / (ni * agg.sizes[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < B; ++i) {
        const double ni = agg.sizes[static_cast<std::size_t>(i)];
        const double wi = (agg.full_sum(i, i) - agg.diag_sum(i)) / (ni * (ni - 1.0));
        for (int j = i + 1; j < B; ++j) {
            const double nj = agg.sizes[static_cast<std::size_t>(j)];
            const double wj = (agg.full_sum(j, j) - agg.diag_sum(j)) / (nj * (nj - 1.0));
            const double u = wi + wj - 2.0 * agg.khat(i, j);
            agg.ustat(i, j) = agg.ustat(j, i) = u;
        }
    }

    // cross sums against the reference bags and the reference off-diagonals;
    // the train x ref block is processed in row chunks to bound scratch memory
    agg.cross.resize(B, B);
    agg.ref_offdiag.resize(B);
    const int total_rows = tr.offset.back();
    for (int i = 0; i < B; ++i) {
        const Bag& ref = refs[static_cast<std::size_t>(i)];
        const double m = static_cast<double>(ref.size());
        Eigen::VectorXd row_sums(total_rows);
        const int chunk = std::max(
            1, static_cast<int>(4'000'000 / std::max<Eigen::Index>(1, ref.size())));
        for (int r0 = 0; r0 < total_rows; r0 += chunk) {
            const int rn = std::min(chunk, total_rows - r0);
            row_sums.segment(r0, rn) =
                kernel_block(tr.samples.middleRows(r0, rn), ref.samples, kernel)
                    .rowwise()
                    .sum();
        }
        for (int a = 0; a < B; ++a) {
            const int r0 = tr.offset[static_cast<std::size_t>(a)];
            const int rn = tr.offset[static_cast<std::size_t>(a) + 1] - r0;
            agg.cross(a, i) = row_sums.segment(r0, rn).sum() /
                              (agg.sizes[static_cast<std::size_t>(a)] * m);
        }
        Eigen::MatrixXd rblock = kernel_block(ref.samples, ref.samples, kernel);
        agg.ref_offdiag(i) = (rblock.sum() - rblock.trace()) / (m * (m - 1.0));
    }
    return agg;
}

}  // namespace bench_detail

}  // namespace mtavg
