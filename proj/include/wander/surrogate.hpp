#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wander/error.hpp"
#include "wander/qp.hpp"

namespace wander {

/// Axis-aligned box [lower, upper] mapping physical parameters to the unit box.
struct Bounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return lower.size(); }

    void validate() const {
        if (lower.size() == 0 || lower.size() != upper.size())
            throw ValidationError({"bounds"}, "bounds: lower and upper must be non-empty and equally sized");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
                throw ValidationError({"bounds"}, "bounds: require finite lower < upper componentwise");
    }

    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
        return (x - lower).cwiseQuotient(upper - lower);
    }
    Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const {
        return lower + u.cwiseProduct(upper - lower);
    }
    bool contains(const Eigen::VectorXd& x) const {
        return x.size() == lower.size() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
    }

    static Bounds unit(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)}; }

    bool operator==(const Bounds& o) const { return lower == o.lower && upper == o.upper; }
};

enum class Kernel { gaussian, inverse_quadratic };

inline std::string_view to_string(Kernel k) {
    return k == Kernel::gaussian ? "gaussian" : "inverse_quadratic";
}

inline Kernel kernel_from_string(std::string_view s) {
    if (s == "gaussian")
        return Kernel::gaussian;
    if (s == "inverse_quadratic")
        return Kernel::inverse_quadratic;
    throw ValidationError({"rbf"}, "unknown RBF kind '" + std::string(s) + "'");
}

/// phi(gamma d) with d the squared distance, composed exactly as
/// exp(-(gamma d)^2) or 1 / (1 + (gamma d)^2).
inline double kernel(Kernel kind, double gamma, double sq_dist) {
    const double r = gamma * sq_dist;
    return kind == Kernel::gaussian ? std::exp(-r * r) : 1.0 / (1.0 + r * r);
}

inline double squared_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).squaredNorm();
}

/// Outcome of a comparison between samples i and j:
/// -1 i preferred, 0 comparable, +1 j preferred.
struct PreferenceRecord {
    std::size_t i = 0;
    std::size_t j = 0;
    int pi = 0;

    bool operator==(const PreferenceRecord&) const = default;
};

inline void validate_preference(int pi) {
    if (pi != -1 && pi != 0 && pi != 1)
        throw ValidationError({"pi"}, "preference must be -1, 0 or +1");
}

struct SurrogateSettings {
    Kernel kind = Kernel::gaussian;
    double gamma = 3.0;
    double sigma = 1000.0;
    double lambda = 1e-9;

    void validate() const {
        std::vector<std::string> bad;
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            bad.emplace_back("gamma");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            bad.emplace_back("sigma");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            bad.emplace_back("lambda");
        if (!bad.empty())
            throw ValidationError(bad, "surrogate settings must be positive and finite");
    }

    bool operator==(const SurrogateSettings&) const = default;
};

/// f(x) = sum_k beta_k phi(gamma d(x, x_k)) over samples in the unit box.
class SurrogateModel {
public:
    SurrogateModel() = default;
    SurrogateModel(SurrogateSettings settings, std::vector<Eigen::VectorXd> samples, Eigen::VectorXd beta,
                   Eigen::VectorXd slacks = {})
        : settings_(settings), samples_(std::move(samples)), beta_(std::move(beta)), slacks_(std::move(slacks)) {
        if (static_cast<std::size_t>(beta_.size()) != samples_.size())
            throw InvalidInput("surrogate: beta length must match sample count");
    }

    double predict(const Eigen::VectorXd& x) const {
        double f = 0.0;
        for (std::size_t k = 0; k < samples_.size(); ++k)
            f += beta_[static_cast<Eigen::Index>(k)]
                 * kernel(settings_.kind, settings_.gamma, squared_distance(x, samples_[k]));
        return f;
    }

    const SurrogateSettings& settings() const { return settings_; }
    const std::vector<Eigen::VectorXd>& samples() const { return samples_; }
    const Eigen::VectorXd& beta() const { return beta_; }
    const Eigen::VectorXd& slacks() const { return slacks_; }
    const qp::KktResiduals& residuals() const { return residuals_; }
    void set_residuals(const qp::KktResiduals& r) { residuals_ = r; }

    bool operator==(const SurrogateModel& o) const {
        return settings_ == o.settings_ && samples_ == o.samples_ && beta_ == o.beta_ && slacks_ == o.slacks_;
    }

private:
    SurrogateSettings settings_;
    std::vector<Eigen::VectorXd> samples_;
    Eigen::VectorXd beta_;
    Eigen::VectorXd slacks_;
    qp::KktResiduals residuals_;
};

/// Row h of the constraint map: Lambda_h = row . beta = f(x_i) - f(x_j).
inline Eigen::MatrixXd preference_differences(const std::vector<Eigen::VectorXd>& X,
                                              const std::vector<PreferenceRecord>& B, Kernel kind,
                                              double gamma) {
    const auto N = static_cast<Eigen::Index>(X.size());
    Eigen::MatrixXd D(static_cast<Eigen::Index>(B.size()), N);
    for (std::size_t h = 0; h < B.size(); ++h)
        for (Eigen::Index k = 0; k < N; ++k)
            D(static_cast<Eigen::Index>(h), k) =
                kernel(kind, gamma, squared_distance(X[B[h].i], X[static_cast<std::size_t>(k)]))
                - kernel(kind, gamma, squared_distance(X[B[h].j], X[static_cast<std::size_t>(k)]));
    return D;
}

/// Assemble the fit problem over z = [beta; eps]:
///   min sum eps + lambda/2 |beta|^2 subject to the relaxed preference
///   constraints and eps >= 0.
inline qp::Problem fit_problem(const std::vector<Eigen::VectorXd>& X, const std::vector<PreferenceRecord>& B,
                               const SurrogateSettings& s) {
    const auto N = static_cast<Eigen::Index>(X.size());
    const auto H = static_cast<Eigen::Index>(B.size());
    const Eigen::MatrixXd D = preference_differences(X, B, s.kind, s.gamma);

    Eigen::Index rows = H;  // eps >= 0
    for (const auto& r : B)
        rows += r.pi == 0 ? 2 : 1;

    qp::Problem p;
    p.Q = Eigen::MatrixXd::Zero(N + H, N + H);
    p.Q.topLeftCorner(N, N).diagonal().setConstant(s.lambda);
    p.c = Eigen::VectorXd::Zero(N + H);
    p.c.tail(H).setOnes();
    p.A = Eigen::MatrixXd::Zero(rows, N + H);
    p.b = Eigen::VectorXd::Zero(rows);

    Eigen::Index row = 0;
    auto add = [&](Eigen::Index h, double sign, double rhs) {
        p.A.block(row, 0, 1, N) = sign * D.row(h);
        p.A(row, N + h) = -1.0;
        p.b[row] = rhs;
        ++row;
    };
    for (Eigen::Index h = 0; h < H; ++h) {
        switch (B[static_cast<std::size_t>(h)].pi) {
        case -1: add(h, 1.0, -s.sigma); break;   // Lambda <= -sigma + eps
        case 1: add(h, -1.0, -s.sigma); break;   // Lambda >= sigma - eps
        default:                                 // |Lambda| <= sigma + eps
            add(h, 1.0, s.sigma);
            add(h, -1.0, s.sigma);
        }
    }
    for (Eigen::Index h = 0; h < H; ++h) {
        p.A(row, N + h) = -1.0;
        ++row;
    }
    return p;
}

/// Fit beta and the slacks to the preference vector B over samples X.
inline SurrogateModel fit(const std::vector<Eigen::VectorXd>& X, const std::vector<PreferenceRecord>& B,
                          const SurrogateSettings& s) {
    s.validate();
    if (B.empty())
        throw InvalidInput("fit: at least one preference is required");
    if (X.empty())
        throw InvalidInput("fit: no samples");
    for (const auto& r : B) {
        if (r.i >= X.size() || r.j >= X.size())
            throw InvalidInput("fit: preference references an unknown sample");
        if (r.i == r.j)
            throw InvalidInput("fit: a preference must compare two distinct samples");
        validate_preference(r.pi);
    }
    const auto N = static_cast<Eigen::Index>(X.size());
    const auto H = static_cast<Eigen::Index>(B.size());
    // beta and eps scale linearly with sigma, so solve the sigma = 1 problem
    // with lambda * sigma and map back. The multipliers are unchanged.
    SurrogateSettings unit = s;
    unit.sigma = 1.0;
    unit.lambda = s.lambda * s.sigma;
    qp::Options loose;
    loose.tolerance = std::numeric_limits<double>::infinity();
    loose.target = 1e-12;
    const qp::Result scaled = qp::solve(fit_problem(X, B, unit), loose);

    const qp::Problem problem = fit_problem(X, B, s);
    Eigen::VectorXd x = s.sigma * scaled.x;
    Eigen::VectorXd z = scaled.z;
    qp::KktResiduals res = qp::kkt_residuals(problem, x, z);
    qp::refine(problem, x, z, res);
    if (!(res.max() <= 1e-6))
        throw qp::SolverFailure("fit: KKT residuals above tolerance", res);
    SurrogateModel model(s, X, x.head(N), x.tail(H));
    model.set_residuals(res);
    return model;
}

} // namespace wander
