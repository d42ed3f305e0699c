#pragma once

#include <optional>

#include "mtavg/similarity.hpp"

namespace mtavg {

enum class Method {
    ne,
    rkmse,
    stb0,
    stb_theory,
    stb_weight,
    mta_const,
    mta_stb,
    pp_james_stein,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Every estimator is canonicalized as a B x B weight matrix over the naive
// estimators: mu_tilde_i = sum_j w_ij muhat_j. Rows sum to 1 for NE/STB*/MTA*;
// R-KMSE is diagonal with entries in [0, 1].
struct WeightMatrix {
    Eigen::MatrixXd values;
    Method method = Method::ne;
};

struct ShrinkageMode {
    enum class Kind { zero, weight, theory };
    Kind kind = Kind::zero;
    double gamma = 0.0;  // weight mode, in [0, 1]
    double c = 1.0;      // theory mode, > 0
    double zeta = 0.0;   // theory mode test threshold; tau_hat = c * zeta

    static ShrinkageMode stb_zero() { return {Kind::zero, 0.0, 1.0, 0.0}; }
    static ShrinkageMode stb_weight(double gamma);
    static ShrinkageMode stb_theory(double c, double zeta);
};

// gamma_i = tau_hat (|V_i| - 1) / ((1 + tau_hat)(|V_i| - 1) + 1); lies in
// [0, tau_hat / (1 + tau_hat)) and is nondecreasing in the neighbor count.
double stb_theory_gamma(double tau_hat, Eigen::Index neighbors_excl_self);

// Row i: w_ii = gamma_i + (1 - gamma_i)/|V_i|, w_ij = (1 - gamma_i)/|V_i| for
// j in V_i \ {i}, 0 otherwise.
WeightMatrix stb_weights(const NeighborGraph& graph, const ShrinkageMode& mode);

// Per-bag shrinkage toward 0 with data-driven intensity
//   lambda = (rho_diag - rho) / ((1/N - 1) rho_diag + (N - 1) rho),
// rho_diag the mean diagonal kernel value and rho the mean of the full Gram.
// Diagonal weight 1 - lambda / (1 + lambda). A vanishing denominator is the
// lambda -> +inf limit (full shrinkage); a negative one is degenerate.
double rkmse_diagonal_weight(double rho_diag, double rho, double n,
                             const std::string& bag_id = "");
WeightMatrix rkmse_weights(const std::vector<Bag>& bags, const KernelSpec& kernel);
WeightMatrix rkmse_weights(const GramCache& cache);

enum class MtaSimilarity { constant, graph };

// W = (I + (gamma / B) D L(A))^{-1} with D = diag(naive MSE estimates) and
// L(A) the graph Laplacian of the similarity matrix. constant mode:
// A = a 11^T with a the mean plug-in squared distance between naive
// embeddings; graph mode: A = test adjacency. Dense solve; rows sum to 1.
Eigen::MatrixXd mta_weight_matrix(const Eigen::VectorXd& mse_diag,
                                  const Eigen::MatrixXd& similarity, double gamma);
WeightMatrix mta_weights(const std::vector<Bag>& bags, const KernelSpec& kernel,
                         double gamma, MtaSimilarity similarity,
                         const NeighborGraph* graph = nullptr);
WeightMatrix mta_weights(const GramCache& cache, double gamma, MtaSimilarity similarity,
                         const NeighborGraph* graph = nullptr);

// Positive-part James-Stein, applied per task with no pooling:
//   mu_tilde = target + (1 - (d - 2) sigma2 / ||muhat - target||^2)_+ (muhat - target).
// Default target is 0. muhats holds one estimate per row; d >= 3 required.
Eigen::MatrixXd pp_james_stein(const Eigen::MatrixXd& muhats, double sigma2,
                               const std::optional<Eigen::VectorXd>& target = std::nullopt);

// Explicit application mu_tilde = W muhats (rows are estimates). The KME path
// never materializes embeddings; losses go through kernel-space formulas.
Eigen::MatrixXd apply_weights(const WeightMatrix& weights, const Eigen::MatrixXd& muhats);

}  // namespace mtavg
