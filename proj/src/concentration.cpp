#include "mtavg/concentration.hpp"

#include <cmath>

#include "mtavg/kernel.hpp"
#include "mtavg/parallel.hpp"
#include "mtavg/rng.hpp"

namespace mtavg {

namespace {

Eigen::VectorXd gaussian_vector(Rng& rng, int d) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = rng.normal();
    return v;
}

// uniform on the sphere of radius `radius` centered at `center * e_1`
Eigen::VectorXd sphere_vector(Rng& rng, int d, double radius, double center) {
    Eigen::VectorXd v = gaussian_vector(rng, d);
    double norm = v.norm();
    while (norm == 0.0) {
        v = gaussian_vector(rng, d);
        norm = v.norm();
    }
    v *= radius / norm;
    v(0) += center;
    return v;
}

// event indicator for one replicate
bool replicate_violates(const ConcentrationCheck& c, std::uint64_t rep) {
    Rng rng(c.seed, static_cast<std::uint64_t>(c.kind), rep);
    const double t = c.t;
    switch (c.kind) {
        case CheckKind::gauss_norm_upper:
        case CheckKind::gauss_norm_lower: {
            Eigen::VectorXd z = c.sigma * gaussian_vector(rng, c.d);
            z(0) += c.mu_norm;
            const double base = std::sqrt(c.mu_norm * c.mu_norm + c.sigma * c.sigma * c.d);
            if (c.kind == CheckKind::gauss_norm_upper)
                return z.norm() >= base + c.sigma * std::sqrt(2.0 * t);
            return z.norm() <= base - 2.0 * c.sigma * std::sqrt(2.0 * t);
        }
        case CheckKind::gauss_dot: {
            Eigen::VectorXd x = c.sigma * gaussian_vector(rng, c.d);
            Eigen::VectorXd y = c.sigma * gaussian_vector(rng, c.d);
            return x.dot(y) >= c.sigma * c.sigma * (std::sqrt(2.0 * c.d * t) + t);
        }
        case CheckKind::bounded_norm_upper:
        case CheckKind::bounded_norm_lower: {
            const double trace_sigma = c.radius * c.radius;
            const double op_sigma = trace_sigma / c.d;
            const double L = c.mu_norm + c.radius;
            const double qs = q_radii(t, trace_sigma, op_sigma, c.N, L).q_sigma;
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(c.d);
            for (int k = 0; k < c.N; ++k)
                sum += sphere_vector(rng, c.d, c.radius, c.mu_norm);
            const double v2 = (sum / c.N).squaredNorm();
            const double mu2 = c.mu_norm * c.mu_norm;
            const double root = std::sqrt(trace_sigma / c.N);
            if (c.kind == CheckKind::bounded_norm_upper) {
                const double thr = mu2 + (root + qs) * (root + qs) + 2.0 * c.mu_norm * qs;
                return v2 >= thr;
            }
            const double clamp = std::max(0.0, root - 4.0 * qs);
            const double thr = mu2 + clamp * clamp - 2.0 * c.mu_norm * qs;
            return v2 <= thr;
        }
        case CheckKind::bounded_dot: {
            const double trace_sigma = c.radius * c.radius;
            const double op_sigma = trace_sigma / c.d;
            const double L = c.radius;
            const double sigma_bar2 = trace_sigma / c.N;
            const double q = q_radii(t, trace_sigma, op_sigma, c.N, L).q;
            Eigen::VectorXd sx = Eigen::VectorXd::Zero(c.d);
            Eigen::VectorXd sy = Eigen::VectorXd::Zero(c.d);
            for (int k = 0; k < c.N; ++k) sx += sphere_vector(rng, c.d, c.radius, 0.0);
            for (int k = 0; k < c.N; ++k) sy += sphere_vector(rng, c.d, c.radius, 0.0);
            const double dot = (sx / c.N).dot(sy / c.N);
            return dot >= 20.0 * q * std::max(std::sqrt(sigma_bar2), q);
        }
        case CheckKind::ustat_upper:
        case CheckKind::ustat_lower: {
            const double trace_sigma = c.radius * c.radius;
            const double op_sigma = trace_sigma / c.d;
            const double L = c.delta / 2.0 + c.radius;  // means at +-delta/2 e_1
            const double sigma_bar2 = trace_sigma / c.N;
            const double q = q_radii(t, trace_sigma, op_sigma, c.N, L).q;
            Eigen::VectorXd sx = Eigen::VectorXd::Zero(c.d);
            Eigen::VectorXd sy = Eigen::VectorXd::Zero(c.d);
            double xnorm2 = 0.0, ynorm2 = 0.0;
            for (int k = 0; k < c.N; ++k) {
                Eigen::VectorXd x = sphere_vector(rng, c.d, c.radius, c.delta / 2.0);
                Eigen::VectorXd y = sphere_vector(rng, c.d, c.radius, -c.delta / 2.0);
                sx += x;
                sy += y;
                xnorm2 += x.squaredNorm();
                ynorm2 += y.squaredNorm();
            }
            const double n = static_cast<double>(c.N);
            const Eigen::VectorXd mx = sx / n, my = sy / n;
            // U = ||Xbar - Ybar||^2
            //     + (||Xbar||^2 + ||Ybar||^2 - mean||X||^2 - mean||Y||^2)/(N-1)
            const double u = (mx - my).squaredNorm() +
                             (mx.squaredNorm() + my.squaredNorm() - xnorm2 / n -
                              ynorm2 / n) /
                                 (n - 1.0);
            const double dmu = c.delta;
            if (c.kind == CheckKind::ustat_upper) {
                const double thr = dmu * dmu + 2.0 * dmu * q +
                                   2.0 * std::sqrt(2.0 * sigma_bar2) * q + 11.0 * q * q;
                return u >= thr;
            }
            const double thr = dmu * dmu - 2.0 * dmu * q -
                               8.0 * std::sqrt(2.0 * sigma_bar2) * q - 32.0 * q * q;
            return u <= thr;
        }
        case CheckKind::gram_frobenius: {
            // linear-kernel instance with known means: bounded samples on
            // spheres around per-task centers
            const int B = c.B;
            Eigen::MatrixXd means(B, c.d);
            std::vector<Bag> bags;
            bags.reserve(static_cast<std::size_t>(B));
            const double L = c.mu_norm + c.radius;  // a.s. bound on samples and means
            for (int i = 0; i < B; ++i) {
                Eigen::VectorXd center =
                    c.mu_norm * gaussian_vector(rng, c.d).normalized();
                means.row(i) = center.transpose();
                Eigen::MatrixXd samples(c.N, c.d);
                for (int k = 0; k < c.N; ++k) {
                    Eigen::VectorXd s = sphere_vector(rng, c.d, c.radius, 0.0);
                    samples.row(k) = (center + s).transpose();
                }
                bags.emplace_back("g" + std::to_string(i), std::move(samples));
            }
            Eigen::MatrixXd muhats = naive_means(bags);
            Eigen::MatrixXd k_true = means * means.transpose();
            Eigen::MatrixXd k_hat = muhats * muhats.transpose();
            const double lhs = ((k_true - k_hat) / double(B)).squaredNorm();
            const double rhs = 4.0 * L * L / double(B) *
                               (means - muhats).rowwise().squaredNorm().sum();
            return lhs > rhs;
        }
    }
    throw std::logic_error("unknown check kind");
}

}  // namespace

std::string check_kind_name(CheckKind k) {
    switch (k) {
        case CheckKind::gauss_norm_upper: return "gauss_norm_upper";
        case CheckKind::gauss_norm_lower: return "gauss_norm_lower";
        case CheckKind::gauss_dot: return "gauss_dot";
        case CheckKind::bounded_norm_upper: return "bounded_norm_upper";
        case CheckKind::bounded_norm_lower: return "bounded_norm_lower";
        case CheckKind::bounded_dot: return "bounded_dot";
        case CheckKind::ustat_upper: return "ustat_upper";
        case CheckKind::ustat_lower: return "ustat_lower";
        case CheckKind::gram_frobenius: return "gram_frobenius";
    }
    throw std::logic_error("unknown check kind");
}

CheckKind check_kind_from_name(const std::string& name) {
    for (CheckKind k : all_check_kinds())
        if (check_kind_name(k) == name) return k;
    throw std::invalid_argument("unknown check kind '" + name + "'");
}

std::vector<CheckKind> all_check_kinds() {
    return {CheckKind::gauss_norm_upper, CheckKind::gauss_norm_lower, CheckKind::gauss_dot,
            CheckKind::bounded_norm_upper, CheckKind::bounded_norm_lower,
            CheckKind::bounded_dot, CheckKind::ustat_upper, CheckKind::ustat_lower,
            CheckKind::gram_frobenius};
}

double check_bound(CheckKind kind, double t) {
    double factor = 1.0;
    switch (kind) {
        case CheckKind::gauss_norm_upper:
        case CheckKind::gauss_norm_lower:
        case CheckKind::gauss_dot: factor = 1.0; break;
        case CheckKind::bounded_norm_upper:
        case CheckKind::bounded_norm_lower: factor = 2.0; break;
        case CheckKind::bounded_dot: factor = 6.0; break;
        case CheckKind::ustat_upper:
        case CheckKind::ustat_lower: factor = 8.0; break;
        case CheckKind::gram_frobenius: return 0.0;  // deterministic inequality
    }
    return std::min(1.0, factor * std::exp(-t));
}

CheckResult run_check(const ConcentrationCheck& check, int threads) {
    if (check.reps < 1) throw std::invalid_argument("reps must be >= 1");
    if ((check.kind == CheckKind::bounded_norm_lower ||
         check.kind == CheckKind::ustat_upper || check.kind == CheckKind::ustat_lower) &&
        check.t < 1.0)
        throw std::invalid_argument(check_kind_name(check.kind) + " requires t >= 1");
    std::vector<std::uint8_t> hits(static_cast<std::size_t>(check.reps));
    parallel_for(check.reps, threads, [&](std::int64_t rep) {
        hits[static_cast<std::size_t>(rep)] =
            replicate_violates(check, static_cast<std::uint64_t>(rep)) ? 1 : 0;
    });
    long count = 0;
    for (std::uint8_t h : hits) count += h;
    CheckResult out;
    out.reps = check.reps;
    out.violation_rate = static_cast<double>(count) / static_cast<double>(check.reps);
    out.bound = check_bound(check.kind, check.t);
    if (check.kind == CheckKind::gram_frobenius) {
        out.pass = count == 0;
    } else {
        const double se =
            std::sqrt(out.bound * (1.0 - out.bound) / static_cast<double>(check.reps));
        out.pass = out.violation_rate <= out.bound + 3.0 * se;
    }
    return out;
}

}  // namespace mtavg
