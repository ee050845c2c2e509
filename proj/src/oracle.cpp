#include "ordmeas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ordmeas {

SortedView::SortedView(const Sample& x) {
    order.resize(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return x[a] < x[b]; });
    sorted.reserve(x.size());
    for (int i : order) sorted.push_back(x[i]);
}

double eval_l(const Sample& x, const LambdaWeights& w) {
    if (x.size() != w.size())
        throw InvalidInput("eval_l: sample and weight sizes differ");
    SortedView view(x);
    double total = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
        total += w.lambda()[k] * view.sorted[k];
    return total;
}

double eval_ksum(const Sample& x, int k) {
    const int n = static_cast<int>(x.size());
    if (k < 1 || k > n) throw InvalidInput("eval_ksum: k out of range");
    SortedView view(x);
    double total = 0;
    for (int pos = k - 1; pos < n; ++pos) total += view.sorted[pos];
    return total;
}

double eval_nested(const Sample& x, const LambdaWeights& w, const LossSpec& loss) {
    const double theta = eval_l(x, w);
    const double n = static_cast<double>(x.size());
    switch (loss.kind) {
        case LossKind::Absolute: {
            double s = 0;
            for (double v : x.values()) s += std::abs(v - theta);
            return s / n;
        }
        case LossKind::Squared: {
            double s = 0;
            for (double v : x.values()) s += (v - theta) * (v - theta);
            return s / n;
        }
        case LossKind::Skewness:
        case LossKind::Kurtosis: {
            double m2 = 0, m3 = 0, m4 = 0;
            for (double v : x.values()) {
                double d = v - theta;
                m2 += d * d;
                m3 += d * d * d;
                m4 += d * d * d * d;
            }
            m2 /= n;
            m3 /= n;
            m4 /= n;
            if (m2 <= 0.0)
                throw InvalidInput("eval_nested: shape measure undefined on a constant sample");
            return loss.kind == LossKind::Skewness ? m3 / std::pow(m2, 1.5)
                                                   : m4 / (m2 * m2);
        }
    }
    throw InvalidInput("eval_nested: unknown loss");
}

double eval_qo(const Sample& x, const QOMatrix& m) {
    if (x.size() != m.size())
        throw InvalidInput("eval_qo: sample and matrix sizes differ");
    SortedView view(x);
    double total = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            total += m(i, j) * view.sorted[i] * view.sorted[j];
    if (m.has_linear_part())
        for (std::size_t k = 0; k < x.size(); ++k)
            total += m.linear_part()[k] * view.sorted[k];
    return total;
}

double eval_measure(const Sample& x, const ResolvedMeasure& m) {
    switch (m.cls) {
        case MeasureClass::Linear:
            return eval_l(x, m.lambda);
        case MeasureClass::Nested:
            return eval_nested(x, m.nested.location, m.nested.loss);
        case MeasureClass::Quadratic:
            return eval_qo(x, m.matrix);
    }
    throw InvalidInput("eval_measure: unknown measure class");
}

}  // namespace ordmeas
