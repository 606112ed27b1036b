#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qfc/core.hpp"

namespace qfc {

using ControlIndex = std::size_t;
using OutcomeIndex = std::size_t;

// Ordered list of string labels mapped to dense indices.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty())
            throw InvariantViolation("LabelSet: at least one label is required");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j])
                    throw InvariantViolation("LabelSet: duplicate label '" + labels_[i] + "'");
    }

    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] const std::string& operator[](std::size_t i) const {
        check(i);
        return labels_[i];
    }
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }

    [[nodiscard]] std::size_t index_of(std::string_view label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label)
                return i;
        throw UnknownLabel("unknown label '" + std::string(label) + "'");
    }

    void check(std::size_t i) const {
        if (i >= labels_.size())
            throw UnknownLabel("label index " + std::to_string(i) + " out of range");
    }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    std::vector<std::string> labels_;
};

// Open-system dynamics E^u(w) = sum_b E_b w E_b^dag.
struct KrausFamily {
    std::vector<Matrix> operators;

    void validate(std::size_t dim) const {
        if (operators.empty())
            throw InvariantViolation("KrausFamily: no operators");
        const auto n = static_cast<Eigen::Index>(dim);
        Matrix sum = Matrix::Zero(n, n);
        for (const auto& e : operators) {
            if (e.rows() != n || e.cols() != n)
                throw DimensionMismatch("KrausFamily: operator has wrong dimension");
            sum += e.adjoint() * e;
        }
        if (detail::max_abs(sum - Matrix::Identity(n, n)) > tolerances().probability)
            throw InvariantViolation("KrausFamily: sum E^dag E is not the identity");
    }
};

// Orthogonal projective measurement followed by a classical noisy channel
// q(y|a). kernel[y][a] with y indexing the model outcomes, a the projectors.
struct MeasurementSpec {
    std::vector<Matrix> projectors;
    std::vector<std::vector<double>> kernel;

    void validate(std::size_t dim, std::size_t num_outcomes) const {
        const auto n = static_cast<Eigen::Index>(dim);
        if (projectors.empty())
            throw InvariantViolation("MeasurementSpec: no projectors");
        Matrix sum = Matrix::Zero(n, n);
        for (const auto& pa : projectors) {
            if (pa.rows() != n || pa.cols() != n)
                throw DimensionMismatch("MeasurementSpec: projector has wrong dimension");
            if (detail::max_abs(pa - pa.adjoint()) > tolerances().probability ||
                detail::max_abs(pa * pa - pa) > tolerances().probability)
                throw InvariantViolation("MeasurementSpec: P_a is not an orthogonal projector");
            sum += pa;
        }
        if (detail::max_abs(sum - Matrix::Identity(n, n)) > tolerances().probability)
            throw InvariantViolation("MeasurementSpec: projectors do not resolve the identity");
        if (kernel.size() != num_outcomes)
            throw DimensionMismatch("MeasurementSpec: kernel needs one row per outcome");
        for (const auto& row : kernel)
            if (row.size() != projectors.size())
                throw DimensionMismatch("MeasurementSpec: kernel row needs one entry per projector");
        for (std::size_t a = 0; a < projectors.size(); ++a) {
            double col = 0.0;
            for (std::size_t y = 0; y < num_outcomes; ++y) {
                if (kernel[y][a] < 0.0)
                    throw InvariantViolation("MeasurementSpec: negative kernel entry");
                col += kernel[y][a];
            }
            if (std::abs(col - 1.0) > tolerances().probability)
                throw InvariantViolation("MeasurementSpec: kernel column does not sum to one");
        }
    }
};

// ============================================================================
// TransferModel
// ============================================================================
// The controlled transfer superoperators Gamma(u,y). Either stored
// structurally (Kraus dynamics + projectors + kernel) or as an explicit list
// of Kraus-like terms per (u,y): Gamma(u,y) w = sum_t K_t w K_t^dag.
class TransferModel {
public:
    struct Structural {
        std::vector<KrausFamily> dynamics; // indexed by control
        MeasurementSpec measurement;
    };
    struct Explicit {
        std::vector<std::vector<std::vector<Matrix>>> terms; // [u][y] -> terms
    };

    static TransferModel structural(std::size_t dim, LabelSet controls, LabelSet outcomes,
                                    std::vector<KrausFamily> dynamics, MeasurementSpec meas) {
        if (dynamics.size() != controls.size())
            throw DimensionMismatch("TransferModel: need one Kraus family per control");
        for (const auto& k : dynamics)
            k.validate(dim);
        meas.validate(dim, outcomes.size());
        TransferModel m(dim, std::move(controls), std::move(outcomes),
                        Structural{std::move(dynamics), std::move(meas)});
        m.check_normalization();
        return m;
    }

    static TransferModel explicit_terms(std::size_t dim, LabelSet controls, LabelSet outcomes,
                                        std::vector<std::vector<std::vector<Matrix>>> terms) {
        if (terms.size() != controls.size())
            throw DimensionMismatch("TransferModel: need terms for every control");
        const auto n = static_cast<Eigen::Index>(dim);
        for (const auto& per_u : terms) {
            if (per_u.size() != outcomes.size())
                throw DimensionMismatch("TransferModel: need terms for every outcome");
            for (const auto& per_y : per_u)
                for (const auto& k : per_y)
                    if (k.rows() != n || k.cols() != n)
                        throw DimensionMismatch("TransferModel: term has wrong dimension");
        }
        TransferModel m(dim, std::move(controls), std::move(outcomes), Explicit{std::move(terms)});
        m.check_normalization();
        return m;
    }

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const LabelSet& controls() const { return controls_; }
    [[nodiscard]] const LabelSet& outcomes() const { return outcomes_; }
    [[nodiscard]] std::size_t num_controls() const { return controls_.size(); }
    [[nodiscard]] std::size_t num_outcomes() const { return outcomes_.size(); }
    [[nodiscard]] bool is_structural() const { return std::holds_alternative<Structural>(repr_); }
    [[nodiscard]] const Structural* structural_repr() const { return std::get_if<Structural>(&repr_); }
    [[nodiscard]] const Explicit* explicit_repr() const { return std::get_if<Explicit>(&repr_); }

    // Gamma(u,y) applied to a Hermitian argument.
    [[nodiscard]] HermitianMatrix apply(ControlIndex u, OutcomeIndex y, const HermitianMatrix& w) const {
        check_labels(u, y);
        check_dim(w.dim());
        const Matrix& x = w.matrix();
        const auto n = static_cast<Eigen::Index>(dim_);
        Matrix out = Matrix::Zero(n, n);
        if (const auto* s = std::get_if<Structural>(&repr_)) {
            Matrix evolved = Matrix::Zero(n, n);
            for (const auto& e : s->dynamics[u].operators)
                evolved += e * x * e.adjoint();
            for (std::size_t a = 0; a < s->measurement.projectors.size(); ++a) {
                const double q = s->measurement.kernel[y][a];
                if (q == 0.0)
                    continue;
                const Matrix& pa = s->measurement.projectors[a];
                out += q * (pa * evolved * pa);
            }
        } else {
            for (const auto& k : std::get<Explicit>(repr_).terms[u][y])
                out += k * x * k.adjoint();
        }
        return HermitianMatrix::hermitized(out);
    }

    // Gamma^dag(u,y) applied to an observable.
    [[nodiscard]] HermitianMatrix adjoint(ControlIndex u, OutcomeIndex y, const HermitianMatrix& b) const {
        check_labels(u, y);
        check_dim(b.dim());
        const Matrix& x = b.matrix();
        const auto n = static_cast<Eigen::Index>(dim_);
        Matrix out = Matrix::Zero(n, n);
        if (const auto* s = std::get_if<Structural>(&repr_)) {
            Matrix measured = Matrix::Zero(n, n);
            for (std::size_t a = 0; a < s->measurement.projectors.size(); ++a) {
                const double q = s->measurement.kernel[y][a];
                if (q == 0.0)
                    continue;
                const Matrix& pa = s->measurement.projectors[a];
                measured += q * (pa * x * pa);
            }
            for (const auto& e : s->dynamics[u].operators)
                out += e.adjoint() * measured * e;
        } else {
            for (const auto& k : std::get<Explicit>(repr_).terms[u][y])
                out += k.adjoint() * x * k;
        }
        return HermitianMatrix::hermitized(out);
    }

    [[nodiscard]] ControlIndex control_index(std::string_view label) const { return controls_.index_of(label); }
    [[nodiscard]] OutcomeIndex outcome_index(std::string_view label) const { return outcomes_.index_of(label); }

private:
    TransferModel(std::size_t dim, LabelSet controls, LabelSet outcomes, std::variant<Structural, Explicit> repr)
        : dim_(dim), controls_(std::move(controls)), outcomes_(std::move(outcomes)), repr_(std::move(repr)) {
        if (dim_ == 0)
            throw InvariantViolation("TransferModel: dimension must be positive");
    }

    void check_labels(ControlIndex u, OutcomeIndex y) const {
        controls_.check(u);
        outcomes_.check(y);
    }

    void check_dim(std::size_t d) const {
        if (d != dim_)
            throw DimensionMismatch("TransferModel: state dimension " + std::to_string(d) +
                                    " does not match model dimension " + std::to_string(dim_));
    }

    // sum_y Gamma^dag(u,y) I = I is equivalent to trace preservation of sum_y Gamma(u,y).
    void check_normalization() const {
        const auto id = HermitianMatrix::identity(dim_);
        for (ControlIndex u = 0; u < num_controls(); ++u) {
            HermitianMatrix sum = HermitianMatrix::zero(dim_);
            for (OutcomeIndex y = 0; y < num_outcomes(); ++y)
                sum += adjoint(u, y, id);
            if (sum.distance(id) > tolerances().probability)
                throw InvariantViolation("TransferModel: sum_y Gamma(u,y) is not trace preserving for control '" +
                                         controls_[u] + "'");
        }
    }

    std::size_t dim_ = 0;
    LabelSet controls_;
    LabelSet outcomes_;
    std::variant<Structural, Explicit> repr_;
};

// ============================================================================
// Filter operations
// ============================================================================

inline HermitianMatrix apply_transfer(const TransferModel& model, ControlIndex u, OutcomeIndex y,
                                      const DensityState& state) {
    return model.apply(u, y, state.hermitian());
}

inline HermitianMatrix adjoint_apply(const TransferModel& model, ControlIndex u, OutcomeIndex y,
                                     const HermitianMatrix& obs) {
    return model.adjoint(u, y, obs);
}

// p(y | u, w) = <Gamma(u,y) w, I>, clamped to [0, 1].
inline double outcome_prob(const TransferModel& model, ControlIndex u, const DensityState& state, OutcomeIndex y) {
    const double p = model.apply(u, y, state.hermitian()).trace() / state.trace();
    const double slack = tolerances().probability;
    if (p < -slack || p > 1.0 + slack)
        throw InvariantViolation("outcome_prob: probability " + std::to_string(p) + " outside [0,1]");
    return std::clamp(p, 0.0, 1.0);
}

inline std::vector<double> outcome_probs(const TransferModel& model, ControlIndex u, const DensityState& state) {
    std::vector<double> ps(model.num_outcomes());
    for (OutcomeIndex y = 0; y < ps.size(); ++y)
        ps[y] = outcome_prob(model, u, state, y);
    return ps;
}

// Stochastic master equation step: Gamma(u,y) w / p(y|u,w).
inline DensityState conditional_update(const TransferModel& model, ControlIndex u, OutcomeIndex y,
                                       const DensityState& state) {
    const HermitianMatrix g = model.apply(u, y, state.hermitian());
    const double p = g.trace() / state.trace();
    if (!(p > tolerances().branch))
        throw ZeroProbabilityBranch("conditional_update: outcome '" + model.outcomes()[y] +
                                    "' has zero probability");
    return DensityState(g * (1.0 / g.trace()));
}

// Non-selective evolution: sum_y Gamma(u,y) rho.
inline DensityState master_step(const TransferModel& model, ControlIndex u, const DensityState& rho) {
    HermitianMatrix sum = HermitianMatrix::zero(model.dim());
    for (OutcomeIndex y = 0; y < model.num_outcomes(); ++y)
        sum += model.apply(u, y, rho.hermitian());
    return DensityState(sum);
}

inline TransferModel build_imperfect_model(std::size_t dim, LabelSet controls, LabelSet outcomes,
                                           std::vector<KrausFamily> dynamics, MeasurementSpec meas) {
    return TransferModel::structural(dim, std::move(controls), std::move(outcomes), std::move(dynamics),
                                     std::move(meas));
}

// ============================================================================
// Random instances and invariant checks
// ============================================================================

// Random density matrix (Ginibre construction) with the given trace.
template <class Rng>
DensityState random_density(std::size_t dim, Rng& rng, double trace = 1.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = Complex(n01(rng), n01(rng));
    Matrix w = g * g.adjoint();
    w *= trace / w.trace().real();
    return DensityState(HermitianMatrix::hermitized(w));
}

template <class Rng>
HermitianMatrix random_hermitian(std::size_t dim, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> n01(0.0, scale);
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = Complex(n01(rng), n01(rng));
    return HermitianMatrix::hermitized(g);
}

// Random unitary via QR of a Ginibre matrix.
template <class Rng>
Matrix random_unitary(std::size_t dim, Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = Complex(n01(rng), n01(rng));
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, n);
}

// Random Kraus family with `count` operators: stacked isometry split into blocks.
template <class Rng>
KrausFamily random_kraus_family(std::size_t dim, std::size_t count, Rng& rng) {
    const Matrix u = random_unitary(dim * count, rng);
    const auto n = static_cast<Eigen::Index>(dim);
    KrausFamily k;
    for (std::size_t b = 0; b < count; ++b)
        k.operators.push_back(u.block(static_cast<Eigen::Index>(b) * n, 0, n, n));
    return k;
}

// Random model: `num_controls` random Kraus families, computational-basis
// projectors and a random column-stochastic kernel over `num_outcomes`.
template <class Rng>
TransferModel random_model(std::size_t dim, std::size_t num_controls, std::size_t num_outcomes, Rng& rng,
                           std::size_t kraus_count = 2) {
    std::vector<std::string> cl, ol;
    for (std::size_t i = 0; i < num_controls; ++i)
        cl.push_back("u" + std::to_string(i));
    for (std::size_t i = 0; i < num_outcomes; ++i)
        ol.push_back("y" + std::to_string(i));
    std::vector<KrausFamily> dyn;
    for (std::size_t u = 0; u < num_controls; ++u)
        dyn.push_back(random_kraus_family(dim, kraus_count, rng));
    MeasurementSpec meas;
    const auto n = static_cast<Eigen::Index>(dim);
    for (Eigen::Index a = 0; a < n; ++a) {
        Matrix p = Matrix::Zero(n, n);
        p(a, a) = 1.0;
        meas.projectors.push_back(p);
    }
    std::uniform_real_distribution<double> u01(0.05, 1.0);
    meas.kernel.assign(num_outcomes, std::vector<double>(dim));
    for (std::size_t a = 0; a < dim; ++a) {
        double total = 0.0;
        for (std::size_t y = 0; y < num_outcomes; ++y)
            total += meas.kernel[y][a] = u01(rng);
        for (std::size_t y = 0; y < num_outcomes; ++y)
            meas.kernel[y][a] /= total;
    }
    return build_imperfect_model(dim, LabelSet(cl), LabelSet(ol), std::move(dyn), std::move(meas));
}

struct ModelCheckReport {
    std::size_t samples = 0;
    double max_normalization_error = 0.0;
    double min_eigenvalue = 0.0;
    [[nodiscard]] bool ok() const {
        return max_normalization_error <= tolerances().probability && min_eigenvalue >= -tolerances().psd;
    }
};

// Normalization and positivity of Gamma(u,y) over random states.
inline ModelCheckReport check_model_invariants(const TransferModel& model, std::size_t samples,
                                               std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    ModelCheckReport r;
    r.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        const DensityState w = random_density(model.dim(), rng);
        for (ControlIndex u = 0; u < model.num_controls(); ++u) {
            double total = 0.0;
            for (OutcomeIndex y = 0; y < model.num_outcomes(); ++y) {
                const HermitianMatrix g = model.apply(u, y, w.hermitian());
                total += g.trace();
                r.min_eigenvalue = std::min(r.min_eigenvalue, g.min_eigenvalue());
            }
            r.max_normalization_error = std::max(r.max_normalization_error, std::abs(total - w.trace()));
        }
    }
    return r;
}

} // namespace qfc
