#include "mtavg/estimators.hpp"

#include <Eigen/LU>
#include <cmath>

namespace mtavg {

std::string method_name(Method m) {
    switch (m) {
        case Method::ne: return "ne";
        case Method::rkmse: return "rkmse";
        case Method::stb0: return "stb0";
        case Method::stb_theory: return "stb_theory";
        case Method::stb_weight: return "stb_weight";
        case Method::mta_const: return "mta_const";
        case Method::mta_stb: return "mta_stb";
        case Method::pp_james_stein: return "pp_james_stein";
    }
    throw std::logic_error("unknown method");
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::ne, Method::rkmse, Method::stb0, Method::stb_theory,
                     Method::stb_weight, Method::mta_const, Method::mta_stb,
                     Method::pp_james_stein})
        if (method_name(m) == name) return m;
    throw std::invalid_argument("unknown method '" + name + "'");
}

ShrinkageMode ShrinkageMode::stb_weight(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("stb_weight gamma must lie in [0, 1]");
    return {Kind::weight, gamma, 1.0, 0.0};
}

ShrinkageMode ShrinkageMode::stb_theory(double c, double zeta) {
    if (!(c > 0.0)) throw std::invalid_argument("stb_theory c must be > 0");
    return {Kind::theory, 0.0, c, zeta};
}

double stb_theory_gamma(double tau_hat, Eigen::Index neighbors_excl_self) {
    const double v = static_cast<double>(neighbors_excl_self);
    return tau_hat * v / ((1.0 + tau_hat) * v + 1.0);
}

WeightMatrix stb_weights(const NeighborGraph& graph, const ShrinkageMode& mode) {
    const Eigen::Index b = graph.size();
    WeightMatrix w;
    w.method = mode.kind == ShrinkageMode::Kind::zero      ? Method::stb0
               : mode.kind == ShrinkageMode::Kind::weight ? Method::stb_weight
                                                          : Method::stb_theory;
    w.values.setZero(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        if (!graph.edge(i, i)) throw std::invalid_argument("graph diagonal must be 1");
        const Eigen::Index v = graph.neighbor_count(i);
        double gamma = 0.0;
        switch (mode.kind) {
            case ShrinkageMode::Kind::zero: gamma = 0.0; break;
            case ShrinkageMode::Kind::weight: gamma = mode.gamma; break;
            case ShrinkageMode::Kind::theory:
                gamma = stb_theory_gamma(mode.c * mode.zeta, v - 1);
                break;
        }
        const double share = (1.0 - gamma) / static_cast<double>(v);
        for (Eigen::Index j = 0; j < b; ++j)
            if (graph.edge(i, j)) w.values(i, j) = share;
        w.values(i, i) += gamma;
    }
    return w;
}

double rkmse_diagonal_weight(double rho_diag, double rho, double n,
                             const std::string& bag_id) {
    const double num = rho_diag - rho;  // >= 0 by Jensen
    const double den = (1.0 / n - 1.0) * rho_diag + (n - 1.0) * rho;
    const double scale = std::max({std::abs(rho_diag), std::abs(rho), 1e-300});
    if (std::abs(num) <= 1e-14 * scale) return 1.0;  // constant bag: no shrinkage
    if (den <= 0.0) {
        if (std::abs(den) <= 1e-14 * scale) return 0.0;  // lambda -> +inf limit
        throw std::domain_error("rkmse: degenerate shrinkage (lambda < 0) for bag '" +
                                bag_id + "'");
    }
    const double lambda = num / den;
    return 1.0 - lambda / (1.0 + lambda);
}

WeightMatrix rkmse_weights(const GramCache& cache) {
    const Eigen::Index b = cache.size();
    WeightMatrix w;
    w.method = Method::rkmse;
    w.values.setZero(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const double n = static_cast<double>(cache.bags()[static_cast<std::size_t>(i)].size());
        if (n < 2) throw std::invalid_argument("rkmse_weights requires >= 2 samples per bag");
        const double rho_diag = cache.diag_sum(i) / n;
        const double rho = cache.full_sum(i, i) / (n * n);
        w.values(i, i) = rkmse_diagonal_weight(
            rho_diag, rho, n, cache.bags()[static_cast<std::size_t>(i)].id);
    }
    return w;
}

WeightMatrix rkmse_weights(const std::vector<Bag>& bags, const KernelSpec& kernel) {
    GramCache cache(bags, kernel);
    return rkmse_weights(cache);
}

Eigen::MatrixXd mta_weight_matrix(const Eigen::VectorXd& mse_diag,
                                  const Eigen::MatrixXd& similarity, double gamma) {
    const Eigen::Index b = mse_diag.size();
    if (similarity.rows() != b || similarity.cols() != b)
        throw std::invalid_argument("similarity matrix shape mismatch");
    if (gamma < 0.0) throw std::invalid_argument("mta gamma must be >= 0");
    Eigen::MatrixXd laplacian = -similarity;
    laplacian.diagonal() += similarity.rowwise().sum();
    Eigen::MatrixXd scaled = mse_diag.asDiagonal() * laplacian;
    Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(b, b) + (gamma / static_cast<double>(b)) * scaled;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::MatrixXd w = lu.solve(Eigen::MatrixXd::Identity(b, b));
    if (!w.allFinite())
        throw std::runtime_error("mta: singular weight system");
    return w;
}

WeightMatrix mta_weights(const GramCache& cache, double gamma, MtaSimilarity similarity,
                         const NeighborGraph* graph) {
    const Eigen::Index b = cache.size();
    Eigen::VectorXd mse(b);
    for (Eigen::Index i = 0; i < b; ++i) mse(i) = cache.naive_mse(i);
    Eigen::MatrixXd a;
    if (similarity == MtaSimilarity::constant) {
        Eigen::MatrixXd khat = cache.naive_gram();
        double mean_sqdist = 0.0;
        for (Eigen::Index i = 0; i < b; ++i)
            for (Eigen::Index j = 0; j < b; ++j)
                if (i != j) mean_sqdist += khat(i, i) - 2.0 * khat(i, j) + khat(j, j);
        mean_sqdist /= static_cast<double>(b) * static_cast<double>(b - 1);
        a = Eigen::MatrixXd::Constant(b, b, mean_sqdist);
    } else {
        if (graph == nullptr || graph->size() != b)
            throw std::invalid_argument("mta graph similarity needs a matching graph");
        a = graph->adj.cast<double>();
    }
    WeightMatrix w;
    w.method = similarity == MtaSimilarity::constant ? Method::mta_const : Method::mta_stb;
    w.values = mta_weight_matrix(mse, a, gamma);
    return w;
}

WeightMatrix mta_weights(const std::vector<Bag>& bags, const KernelSpec& kernel,
                         double gamma, MtaSimilarity similarity, const NeighborGraph* graph) {
    GramCache cache(bags, kernel);
    return mta_weights(cache, gamma, similarity, graph);
}

Eigen::MatrixXd pp_james_stein(const Eigen::MatrixXd& muhats, double sigma2,
                               const std::optional<Eigen::VectorXd>& target) {
    const Eigen::Index d = muhats.cols();
    if (d < 3) throw std::invalid_argument("pp_james_stein requires dimension >= 3");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
    Eigen::RowVectorXd nu = Eigen::RowVectorXd::Zero(d);
    if (target) {
        if (target->size() != d) throw std::invalid_argument("target dimension mismatch");
        nu = target->transpose();
    }
    Eigen::MatrixXd out(muhats.rows(), d);
    for (Eigen::Index i = 0; i < muhats.rows(); ++i) {
        Eigen::RowVectorXd centered = muhats.row(i) - nu;
        const double norm2 = centered.squaredNorm();
        double factor = 0.0;
        if (norm2 > 0.0) factor = std::max(0.0, 1.0 - (double(d) - 2.0) * sigma2 / norm2);
        out.row(i) = nu + factor * centered;
    }
    return out;
}

Eigen::MatrixXd apply_weights(const WeightMatrix& weights, const Eigen::MatrixXd& muhats) {
    if (weights.values.cols() != muhats.rows())
        throw std::invalid_argument("weights/muhats shape mismatch");
    return weights.values * muhats;
}

}  // namespace mtavg
