#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmeas {

/// Thrown when a measure name or its parameters are invalid.
struct MeasureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when inputs violate a structural precondition (dimension
/// mismatch, non-finite data, degenerate sample).
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A sample of real observations. Values keep their insertion order;
/// every measure in the library is invariant to that order.
class Sample {
  public:
    Sample() = default;
    explicit Sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty())
            throw InvalidInput("Sample: needs at least one value");
        for (double v : values_)
            if (!std::isfinite(v))
                throw InvalidInput("Sample: values must be finite");
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

  private:
    std::vector<double> values_;
};

/// Weights over sorted positions, together with the first-difference
/// decomposition delta[k] = lambda[k] - lambda[k-1] (with lambda[-1] := 0)
/// and the index sets where the differences are strictly positive or
/// negative. Positions are stored 0-based.
class LambdaWeights {
  public:
    LambdaWeights() = default;

    static LambdaWeights from_lambda(std::vector<double> lambda) {
        LambdaWeights w;
        w.lambda_ = std::move(lambda);
        if (w.lambda_.empty())
            throw InvalidInput("LambdaWeights: empty weight vector");
        w.delta_.resize(w.lambda_.size());
        double prev = 0.0;
        for (std::size_t k = 0; k < w.lambda_.size(); ++k) {
            if (!std::isfinite(w.lambda_[k]))
                throw InvalidInput("LambdaWeights: weights must be finite");
            w.delta_[k] = w.lambda_[k] - prev;
            prev = w.lambda_[k];
            if (w.delta_[k] > 0)
                w.delta_plus_.push_back(static_cast<int>(k));
            else if (w.delta_[k] < 0)
                w.delta_minus_.push_back(static_cast<int>(k));
        }
        return w;
    }

    std::size_t size() const { return lambda_.size(); }
    const std::vector<double>& lambda() const { return lambda_; }
    const std::vector<double>& delta() const { return delta_; }
    /// 0-based positions k with delta[k] > 0.
    const std::vector<int>& delta_plus() const { return delta_plus_; }
    /// 0-based positions k with delta[k] < 0.
    const std::vector<int>& delta_minus() const { return delta_minus_; }

    double lambda_sum() const {
        double s = 0;
        for (double v : lambda_) s += v;
        return s;
    }

  private:
    std::vector<double> lambda_;
    std::vector<double> delta_;
    std::vector<int> delta_plus_;
    std::vector<int> delta_minus_;
};

/// Loss applied to the deviations of a sample from a pinned location value.
enum class LossKind {
    Absolute,  // mean absolute deviation, LP-representable
    Squared,   // mean squared deviation, convex quadratic
    Skewness,  // standardized third moment, evaluated after the solve
    Kurtosis,  // standardized fourth moment, evaluated after the solve
};

struct LossSpec {
    LossKind kind = LossKind::Absolute;

    bool lp_representable() const { return kind == LossKind::Absolute; }
    bool convex_quadratic() const { return kind == LossKind::Squared; }
    /// Shape losses are computed arithmetically from the pinned location.
    bool post_evaluation_only() const {
        return kind == LossKind::Skewness || kind == LossKind::Kurtosis;
    }
};

/// Coefficient matrix of a quadratic measure over sorted values,
/// optionally extended with a linear weight vector.
class QOMatrix {
  public:
    QOMatrix() = default;
    QOMatrix(std::size_t n, std::vector<double> entries)
        : n_(n), m_(std::move(entries)) {
        if (m_.size() != n * n)
            throw InvalidInput("QOMatrix: entry count must be n*n");
        for (double v : m_)
            if (!std::isfinite(v))
                throw InvalidInput("QOMatrix: entries must be finite");
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }
    double& at(std::size_t i, std::size_t j) { return m_[i * n_ + j]; }
    const std::vector<double>& entries() const { return m_; }

    bool has_linear_part() const { return !linear_.empty(); }
    const std::vector<double>& linear_part() const { return linear_; }
    void set_linear_part(std::vector<double> lp) {
        if (lp.size() != n_)
            throw InvalidInput("QOMatrix: linear part length must match n");
        linear_ = std::move(lp);
    }

    /// (M + M^T) / 2, useful when the quadratic form is all that matters.
    QOMatrix symmetrized() const {
        QOMatrix s(n_, m_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                s.at(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        s.linear_ = linear_;
        return s;
    }

  private:
    std::size_t n_ = 0;
    std::vector<double> m_;
    std::vector<double> linear_;
};

}  // namespace ordmeas
