#pragma once

#include <cstdint>

#include "mtavg/bounds.hpp"

namespace mtavg {

// Deviation events verified by Monte Carlo. gauss_* sample N(mu, sigma^2 I_d);
// bounded_* and ustat_* sample uniformly on spheres of radius `radius`
// centered at distance `mu_norm` (resp. separation `delta`) from the origin,
// so Sigma = (radius^2/d) I, Tr Sigma, ||Sigma||_op and d_eff are known
// exactly. gram_frobenius evaluates a deterministic inequality per instance.
enum class CheckKind {
    gauss_norm_upper,   // P(||Z|| >= sqrt(||mu||^2 + sigma^2 d) + sigma sqrt(2t)) <= e^-t
    gauss_norm_lower,   // P(||Z|| <= sqrt(||mu||^2 + sigma^2 d) - 2 sigma sqrt(2t)) <= e^-t
    gauss_dot,          // P(<X1, X2> >= sigma^2 (sqrt(2 d t) + t)) <= e^-t
    bounded_norm_upper, // P(V^2 >= ||mu||^2 + (sqrt(TrS/N) + qS)^2 + 2||mu|| qS) <= 2e^-t
    bounded_norm_lower, // P(V^2 <= ||mu||^2 + (sqrt(TrS/N) - 4qS)_+^2 - 2||mu|| qS) <= 2e^-t, t>=1
    bounded_dot,        // P(<Xbar, Ybar> >= 20 q max(sigma_bar, q)) <= 6e^-t (centered)
    ustat_upper,        // P(U >= D^2 + 2D q + 2 sqrt(2 sb2) q + 11 q^2) <= 8e^-t, t>=1
    ustat_lower,        // P(U <= D^2 - 2D q - 8 sqrt(2 sb2) q - 32 q^2) <= 8e^-t, t>=1
    gram_frobenius,     // ||(K - Khat)/B||_F^2 <= (4 L^2 / B) sum_i ||mu_i - muhat_i||^2
};

std::string check_kind_name(CheckKind k);
CheckKind check_kind_from_name(const std::string& name);
std::vector<CheckKind> all_check_kinds();

struct ConcentrationCheck {
    CheckKind kind = CheckKind::gauss_norm_upper;
    double t = 1.0;
    long reps = 100000;
    std::uint64_t seed = 0;

    int d = 50;             // ambient dimension
    int N = 100;            // samples per bag (bounded/ustat kinds)
    double sigma = 1.0;     // gauss kinds: coordinate standard deviation
    double mu_norm = 1.0;   // mean offset (gauss_norm / bounded_norm kinds)
    double radius = 1.0;    // sphere radius (bounded/ustat kinds)
    double delta = 1.0;     // ||mu_X - mu_Y|| (ustat kinds)
    int B = 10;             // tasks per instance (gram_frobenius)
};

struct CheckResult {
    double violation_rate = 0.0;
    double bound = 0.0;  // stated probability bound (1 capped); 0 for gram_frobenius
    long reps = 0;
    bool pass = false;   // rate <= bound + 3 sqrt(bound (1 - bound) / reps)
};

double check_bound(CheckKind kind, double t);
CheckResult run_check(const ConcentrationCheck& check, int threads = 1);

}  // namespace mtavg
