#include "fbflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fbflow {
namespace {

void require_positive_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw ParameterError("resolvent step must satisfy eta > 0");
    }
}

void require_same_dim(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw ParameterError(std::string("dimension mismatch: ") + what);
    }
}

double l1_subgradient_distance(double w, const Vector& p, const Vector& u) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double d = 0.0;
        if (p[i] > 0.0) {
            d = u[i] - w;
        } else if (p[i] < 0.0) {
            d = u[i] + w;
        } else {
            d = std::max(std::abs(u[i]) - w, 0.0);
        }
        sq += d * d;
    }
    return std::sqrt(sq);
}

double box_cone_distance(const Vector& lo, const Vector& hi, const Vector& p, const Vector& u) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < lo[i] || p[i] > hi[i]) {
            return std::numeric_limits<double>::infinity();
        }
        double d = 0.0;
        if (lo[i] == hi[i]) {
            d = 0.0;
        } else if (p[i] == lo[i]) {
            d = std::max(u[i], 0.0);
        } else if (p[i] == hi[i]) {
            d = std::max(-u[i], 0.0);
        } else {
            d = u[i];
        }
        sq += d * d;
    }
    return std::sqrt(sq);
}

void validate_box(const Vector& lo, const Vector& hi) {
    if (lo.size() == 0 || lo.size() != hi.size()) {
        throw ParameterError("box bounds must be nonempty and of equal dimension");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
            throw ParameterError("box bounds must satisfy lo <= hi componentwise");
        }
    }
}

struct ProxBuilder {
    FunctionOracle operator()(const prox_spec::Zero&) const {
        FunctionOracle f;
        f.description = "zero";
        f.value = [](const Vector&) { return 0.0; };
        f.gradient = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
        f.prox = [](double eta, const Vector& x) {
            require_positive_eta(eta);
            return x;
        };
        f.subgradient_distance = [](const Vector&, const Vector& u) { return u.norm(); };
        return f;
    }

    FunctionOracle operator()(const prox_spec::L1Norm& s) const {
        if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
            throw ParameterError("l1_norm requires weight w > 0");
        }
        const double w = s.weight;
        FunctionOracle f;
        f.description = "l1_norm(w=" + std::to_string(w) + ")";
        f.value = [w](const Vector& x) { return w * x.lpNorm<1>(); };
        f.prox = [w](double eta, const Vector& x) {
            require_positive_eta(eta);
            const double thr = eta * w;
            Vector p(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double a = std::abs(x[i]) - thr;
                p[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
            }
            return p;
        };
        f.subgradient_distance = [w](const Vector& p, const Vector& u) {
            return l1_subgradient_distance(w, p, u);
        };
        return f;
    }

    FunctionOracle operator()(const prox_spec::ScaledSqNorm& s) const {
        if (!(s.c > 0.0) || !std::isfinite(s.c)) {
            throw ParameterError("scaled_sqnorm requires c > 0");
        }
        const double c = s.c;
        FunctionOracle f;
        f.description = "scaled_sqnorm(c=" + std::to_string(c) + ")";
        f.strong_convexity = c;
        f.value = [c](const Vector& x) { return 0.5 * c * x.squaredNorm(); };
        f.gradient = [c](const Vector& x) { return Vector(c * x); };
        f.prox = [c](double eta, const Vector& x) {
            require_positive_eta(eta);
            return Vector(x / (1.0 + eta * c));
        };
        f.subgradient_distance = [c](const Vector& p, const Vector& u) { return (u - c * p).norm(); };
        return f;
    }

    FunctionOracle operator()(const prox_spec::BoxIndicator& s) const {
        validate_box(s.lo, s.hi);
        Vector lo = s.lo;
        Vector hi = s.hi;
        FunctionOracle f;
        f.description = "box_indicator";
        f.value = [lo, hi](const Vector& x) {
            require_same_dim(x, lo, "box_indicator");
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (x[i] < lo[i] || x[i] > hi[i]) return std::numeric_limits<double>::infinity();
            }
            return 0.0;
        };
        f.prox = [lo, hi](double eta, const Vector& x) {
            require_positive_eta(eta);
            require_same_dim(x, lo, "box_indicator");
            return Vector(x.cwiseMax(lo).cwiseMin(hi));
        };
        f.subgradient_distance = [lo, hi](const Vector& p, const Vector& u) {
            return box_cone_distance(lo, hi, p, u);
        };
        return f;
    }

    FunctionOracle operator()(const prox_spec::TranslatedLinear& s) const {
        if (!(s.rho > 0.0) || !std::isfinite(s.rho)) {
            throw ParameterError("translated_linear requires rho > 0");
        }
        if (s.c.size() == 0 || !s.c.allFinite()) {
            throw ParameterError("translated_linear requires a finite nonempty shift c");
        }
        const double rho = s.rho;
        Vector c = s.c;
        FunctionOracle f;
        f.description = "translated_linear(rho=" + std::to_string(rho) + ")";
        f.strong_convexity = rho;
        f.value = [rho, c](const Vector& x) { return 0.5 * rho * x.squaredNorm() - c.dot(x); };
        f.gradient = [rho, c](const Vector& x) { return Vector(rho * x - c); };
        f.prox = [rho, c](double eta, const Vector& x) {
            require_positive_eta(eta);
            require_same_dim(x, c, "translated_linear");
            return Vector((x + eta * c) / (1.0 + eta * rho));
        };
        f.subgradient_distance = [rho, c](const Vector& p, const Vector& u) {
            return (u - (rho * p - c)).norm();
        };
        return f;
    }
};

}  // namespace

Vector ResolventOracle::resolve(double eta, const Vector& x) const {
    require_positive_eta(eta);
    return resolve_fn(eta, x);
}

ResolventOracle FunctionOracle::subdifferential() const {
    if (!prox) {
        throw ParameterError("function '" + description + "' has no prox");
    }
    return ResolventOracle{prox, subgradient_distance, "subdifferential of " + description};
}

MonotoneMap FunctionOracle::gradient_map(double beta) const {
    if (!gradient) {
        throw ParameterError("function '" + description + "' has no gradient");
    }
    return MonotoneMap{gradient, beta, "gradient of " + description};
}

FunctionOracle build_prox(const ProxSpec& spec) { return std::visit(ProxBuilder{}, spec); }

ResolventOracle zero_operator() { return build_prox(prox_spec::Zero{}).subdifferential(); }

ResolventOracle translated_linear_operator(double rho, Vector c) {
    ResolventOracle a = build_prox(prox_spec::TranslatedLinear{rho, std::move(c)}).subdifferential();
    a.description = "translated_linear";
    return a;
}

ResolventOracle box_normal_cone(Vector lo, Vector hi) {
    ResolventOracle a = build_prox(prox_spec::BoxIndicator{std::move(lo), std::move(hi)}).subdifferential();
    a.description = "box_normal_cone";
    return a;
}

Vector resolvent(const ResolventOracle& a, double eta, const Vector& x) { return a.resolve(eta, x); }

MonotoneMap identity_map() {
    return MonotoneMap{[](const Vector& x) { return x; }, 1.0, "identity"};
}

MonotoneMap linear_map(const Matrix& m, std::string description) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ParameterError("linear map requires a nonempty square matrix");
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const double norm = svd.singularValues()(0);
    const double beta = norm > 0.0 ? 1.0 / norm : std::numeric_limits<double>::infinity();
    return MonotoneMap{[m](const Vector& x) { return Vector(m * x); }, beta, std::move(description)};
}

MonotoneMap rotation_map() {
    Matrix s(2, 2);
    s << 0.0, 1.0, -1.0, 0.0;
    return linear_map(s, "rotation");
}

GraphSampler sample_map(const MonotoneMap& map) {
    return [map](const Vector& z) { return std::make_pair(z, map(z)); };
}

GraphSampler sample_sum(const ResolventOracle& a, const MonotoneMap& b, double eta) {
    require_positive_eta(eta);
    return [a, b, eta](const Vector& z) {
        Vector p = a.resolve(eta, z);
        Vector out = (z - p) / eta + b(p);
        return std::make_pair(std::move(p), std::move(out));
    };
}

AuditReport audit_map(const GraphSampler& sampler, std::size_t dim, double rho_claim,
                      std::optional<double> beta_claim, std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw ParameterError("audit requires n_pairs >= 1");
    if (dim < 1) throw ParameterError("audit requires dim >= 1");
    if (beta_claim && !(*beta_claim > 0.0)) throw ParameterError("beta claim must be positive");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    auto draw = [&]() {
        Vector dir(d);
        for (Eigen::Index i = 0; i < d; ++i) dir[i] = normal(rng);
        const double n = dir.norm();
        if (n == 0.0) return Vector(Vector::Zero(d));
        const double r = kAuditRadius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
        return Vector(dir * (r / n));
    };

    AuditReport rep;
    rep.rho_claim = rho_claim;
    rep.beta_claim = beta_claim;
    rep.min_monotone_quotient = std::numeric_limits<double>::infinity();

    // Resampling is bounded so that a map with a single-point range cannot hang.
    const std::size_t max_draws = 100 * n_pairs + 1000;
    std::size_t draws = 0;
    while (rep.pairs < n_pairs && draws < max_draws) {
        ++draws;
        const auto [x1, y1] = sampler(draw());
        const auto [x2, y2] = sampler(draw());
        const Vector din = x1 - x2;
        const double din_sq = din.squaredNorm();
        if (din_sq == 0.0) {
            ++rep.discarded;
            continue;
        }
        const Vector dout = y1 - y2;
        const double inner = dout.dot(din);
        rep.min_monotone_quotient = std::min(rep.min_monotone_quotient, inner / din_sq);
        rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, dout.norm() / std::sqrt(din_sq));
        if (beta_claim && inner - *beta_claim * dout.squaredNorm() < -1e-6) {
            ++rep.cocoercivity_violations;
        }
        ++rep.pairs;
    }
    if (rep.pairs == 0) {
        throw ParameterError("audit could not draw a non-degenerate pair");
    }
    rep.monotone_pass = rep.min_monotone_quotient >= rho_claim - kAuditSlack;
    if (beta_claim) {
        rep.lipschitz_pass = rep.max_lipschitz_ratio <= 1.0 / *beta_claim + kAuditSlack;
        rep.cocoercivity_violation_fraction =
            static_cast<double>(rep.cocoercivity_violations) / static_cast<double>(rep.pairs);
    }
    return rep;
}

}  // namespace fbflow
