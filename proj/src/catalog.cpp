#include "ordmeas/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace ordmeas {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw MeasureError(msg);
}

int default_trim(const MeasureParams& p, int n, bool lower) {
    // Sweep convention: trim a tenth from each side unless given.
    if (lower && p.r) return *p.r;
    if (!lower && p.s) return *p.s;
    return n / 10;
}

/// 1-based sorted position of the tau-quantile, q = floor(tau*n), clamped
/// to at least 1.
int quantile_position(double tau, int n) {
    require(tau > 0.0 && tau < 1.0, "quantile: tau must lie in (0,1)");
    int q = static_cast<int>(std::floor(tau * n));
    return std::max(q, 1);
}

/// 1-based position used when a single median slot is required. For even
/// n this is n/2; deviations around any point between the two central
/// values sum identically, so the choice is benign.
int median_position(int n) { return (n % 2 == 1) ? (n + 1) / 2 : n / 2; }

std::vector<double> zeros(int n) { return std::vector<double>(static_cast<std::size_t>(n), 0.0); }

/// Multiplicity of each sorted position in the (r,s)-winsorized sample:
/// position r+1 absorbs the r clamped low values, position n-s the s
/// clamped high values (1-based positions; returned 0-based).
std::vector<int> winsor_multiplicity(int n, int r, int s) {
    require(r >= 0 && s >= 0, "winsorize: r and s must be nonnegative");
    require(r + s < n, "winsorize: r + s must be smaller than n");
    std::vector<int> mult(static_cast<std::size_t>(n), 0);
    int lo = r;          // 0-based index of position r+1
    int hi = n - s - 1;  // 0-based index of position n-s
    for (int k = lo; k <= hi; ++k) mult[k] = 1;
    mult[lo] += r;
    mult[hi] += s;
    return mult;
}

}  // namespace

LambdaWeights lambda_for(const std::string& name, int n, const MeasureParams& params) {
    require(n >= 1, "lambda_for: n must be positive");
    std::vector<double> l = zeros(n);

    if (name == "mean") {
        std::fill(l.begin(), l.end(), 1.0 / n);
    } else if (name == "weighted-mean") {
        require(params.weights.has_value(), "weighted-mean: weights required");
        const auto& w = *params.weights;
        require(static_cast<int>(w.size()) == n, "weighted-mean: weight length must equal n");
        double sum = 0;
        for (double v : w) {
            require(v >= 0.0, "weighted-mean: weights must be nonnegative");
            sum += v;
        }
        require(std::abs(sum - 1.0) <= 1e-12, "weighted-mean: weights must sum to 1");
        l = w;
    } else if (name == "max") {
        l[n - 1] = 1.0;
    } else if (name == "min") {
        l[0] = 1.0;
    } else if (name == "median") {
        if (n % 2 == 1) {
            l[(n - 1) / 2] = 1.0;
        } else {
            l[n / 2 - 1] = 0.5;
            l[n / 2] = 0.5;
        }
    } else if (name == "quantile") {
        require(params.tau.has_value() || params.q.has_value(), "quantile: tau or q required");
        int q = params.q ? *params.q : quantile_position(*params.tau, n);
        require(q >= 1 && q <= n, "quantile: position out of range");
        l[q - 1] = 1.0;
    } else if (name == "1quartile") {
        l[quantile_position(0.25, n) - 1] = 1.0;
    } else if (name == "3quartile") {
        l[quantile_position(0.75, n) - 1] = 1.0;
    } else if (name == "midrange") {
        l[0] += 0.5;
        l[n - 1] += 0.5;
    } else if (name == "gen-midrange") {
        require(params.r.has_value() && params.s.has_value(), "gen-midrange: r and s required");
        int r = *params.r, s = *params.s;
        require(r >= 1 && s >= 1 && r <= s && s <= n, "gen-midrange: need 1 <= r <= s <= n");
        l[r - 1] += 0.5;
        l[s - 1] += 0.5;
    } else if (name == "trimean") {
        int q1 = std::max(n / 4, 1), q2 = std::max(n / 2, 1), q3 = std::max(3 * n / 4, 1);
        l[q1 - 1] += 0.25;
        l[q2 - 1] += 0.5;
        l[q3 - 1] += 0.25;
    } else if (name == "trim-mean") {
        int r = default_trim(params, n, true), s = default_trim(params, n, false);
        require(r >= 0 && s >= 0, "trim-mean: r and s must be nonnegative");
        require(r + s < n, "trim-mean: r + s must be smaller than n");
        for (int k = r; k < n - s; ++k) l[k] = 1.0 / (n - r - s);
    } else if (name == "mid-mean") {
        int r = default_trim(params, n, true), s = default_trim(params, n, false);
        require(r >= 1 && s >= 1, "mid-mean: r and s must be at least 1");
        require(r + s <= n, "mid-mean: r + s must not exceed n");
        for (int k = 0; k < r; ++k) l[k] = 0.5 / r;
        for (int k = n - s; k < n; ++k) l[k] = 0.5 / s;
    } else if (name == "win-mean") {
        int r = default_trim(params, n, true), s = default_trim(params, n, false);
        auto mult = winsor_multiplicity(n, r, s);
        for (int k = 0; k < n; ++k) l[k] = static_cast<double>(mult[k]) / n;
    } else if (name == "range") {
        require(n >= 2, "range: needs n >= 2");
        l[0] = -1.0;
        l[n - 1] = 1.0;
    } else if (name == "iqr") {
        require(n >= 2, "iqr: needs n >= 2");
        l[quantile_position(0.25, n) - 1] -= 1.0;
        l[quantile_position(0.75, n) - 1] += 1.0;
    } else if (name == "madev-median") {
        int q = median_position(n);
        for (int k = 1; k <= n; ++k) {
            if (k < q)
                l[k - 1] = -1.0 / n;
            else if (k == q)
                l[k - 1] = static_cast<double>(2 * q - n - 1) / n;
            else
                l[k - 1] = 1.0 / n;
        }
    } else if (name == "gini-difs") {
        for (int i = 1; i <= n; ++i)
            l[i - 1] = 2.0 / (static_cast<double>(n) * n) * (2 * i - n - 1);
    } else {
        throw MeasureError("lambda_for: unknown measure '" + name + "'");
    }
    return LambdaWeights::from_lambda(std::move(l));
}

QOMatrix msdev_from_lambda_matrix(const LambdaWeights& w) {
    const int n = static_cast<int>(w.size());
    const auto& l = w.lambda();
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m[i * n + j] = (i == j) ? 1.0 + n * l[i] * l[i] - 2.0 * l[i]
                                    : n * l[i] * l[j] - 2.0 * l[j];
    return QOMatrix(static_cast<std::size_t>(n), std::move(m));
}

namespace {

/// Deviation matrix for a generalized window variance: sample positions
/// carry the given multiplicities, the reference value is their weighted
/// mean, and the result is normalized by `div`.
QOMatrix window_variance_matrix(int n, const std::vector<int>& mult, double div) {
    double total = 0;
    for (int m : mult) total += m;
    std::vector<double> entries(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (mult[i] == 0) continue;
        for (int j = 0; j < n; ++j) {
            if (mult[j] == 0) continue;
            double v = -static_cast<double>(mult[i]) * mult[j] / total;
            if (i == j) v += mult[i];
            entries[i * n + j] = v / div;
        }
    }
    return QOMatrix(static_cast<std::size_t>(n), std::move(entries));
}

LambdaWeights nested_location(const std::string& name, int n, const MeasureParams& params) {
    MeasureParams inner;
    inner.r = params.r;
    inner.s = params.s;
    inner.tau = params.tau;
    inner.q = params.q;
    return lambda_for(name, n, inner);
}

}  // namespace

QOMatrix qo_matrix_for(const std::string& name, int n, const MeasureParams& params) {
    require(n >= 1, "qo_matrix_for: n must be positive");

    if (name == "variance" || name == "msdev-mean" || name == "msdev-median" ||
        name == "msdev-max" || name == "msdev-min") {
        std::string loc = name == "variance" ? "mean" : name.substr(6);
        QOMatrix raw = msdev_from_lambda_matrix(nested_location(loc, n, params));
        std::vector<double> scaled = raw.entries();
        for (double& v : scaled) v /= n;
        return QOMatrix(static_cast<std::size_t>(n), std::move(scaled));
    }
    if (name == "msdev-from-L") {
        if (params.lambda_name)
            return msdev_from_lambda_matrix(nested_location(*params.lambda_name, n, params));
        require(params.weights.has_value() &&
                    static_cast<int>(params.weights->size()) == n,
                "msdev-from-L: lambda name or a weight vector of length n required");
        return msdev_from_lambda_matrix(LambdaWeights::from_lambda(*params.weights));
    }
    if (name == "trim-variance") {
        int r = default_trim(params, n, true), s = default_trim(params, n, false);
        require(r >= 0 && s >= 0 && r + s < n, "trim-variance: need r,s >= 0 and r+s < n");
        std::vector<int> mult(static_cast<std::size_t>(n), 0);
        for (int k = r; k < n - s; ++k) mult[k] = 1;
        return window_variance_matrix(n, mult, static_cast<double>(n - r - s));
    }
    if (name == "win-variance") {
        int r = default_trim(params, n, true), s = default_trim(params, n, false);
        return window_variance_matrix(n, winsor_multiplicity(n, r, s), static_cast<double>(n));
    }
    throw MeasureError("qo_matrix_for: unknown measure '" + name + "'");
}

NestedSpec nested_for(const std::string& name, int n, const MeasureParams& params) {
    static const std::map<std::string, std::pair<std::string, LossKind>> table = {
        {"variance", {"mean", LossKind::Squared}},
        {"msdev-mean", {"mean", LossKind::Squared}},
        {"msdev-median", {"median", LossKind::Squared}},
        {"msdev-max", {"max", LossKind::Squared}},
        {"msdev-min", {"min", LossKind::Squared}},
        {"madev-mean", {"mean", LossKind::Absolute}},
        {"madev-median", {"median", LossKind::Absolute}},
        {"madev-max", {"max", LossKind::Absolute}},
        {"madev-min", {"min", LossKind::Absolute}},
        {"skewness", {"mean", LossKind::Skewness}},
        {"kurtosis", {"mean", LossKind::Kurtosis}},
    };

    NestedSpec spec;
    if (name == "madev" || name == "msdev") {
        require(params.lambda_name.has_value(),
                name + ": generic form needs a lambda= location name");
        spec.location = nested_location(*params.lambda_name, n, params);
        spec.loss.kind = name == "madev" ? LossKind::Absolute : LossKind::Squared;
        return spec;
    }
    auto it = table.find(name);
    require(it != table.end(), "nested_for: unknown measure '" + name + "'");
    std::string loc = params.lambda_name.value_or(it->second.first);
    spec.location = nested_location(loc, n, params);
    spec.loss.kind = it->second.second;
    return spec;
}

ResolvedMeasure resolve_measure(const std::string& name, int n, const MeasureParams& params) {
    ResolvedMeasure m;
    m.name = name;
    static const std::vector<std::string> nested_names = {
        "variance", "msdev-mean", "msdev-median", "msdev-max", "msdev-min",
        "madev-mean", "madev-max", "madev-min", "skewness", "kurtosis",
        "madev", "msdev"};
    if (std::find(nested_names.begin(), nested_names.end(), name) != nested_names.end()) {
        m.cls = MeasureClass::Nested;
        m.nested = nested_for(name, n, params);
    } else if (name == "trim-variance" || name == "win-variance" || name == "msdev-from-L") {
        m.cls = MeasureClass::Quadratic;
        m.matrix = qo_matrix_for(name, n, params);
    } else {
        m.cls = MeasureClass::Linear;
        m.lambda = lambda_for(name, n, params);
    }
    return m;
}

ResolvedMeasure resolve_measure(const MeasureSpec& spec, int n) {
    ResolvedMeasure m;
    m.name = spec.name;
    m.cls = spec.cls;
    switch (spec.cls) {
        case MeasureClass::Linear:
            m.lambda = lambda_for(spec.name, n, spec.params);
            break;
        case MeasureClass::Nested:
            m.nested = nested_for(spec.name, n, spec.params);
            break;
        case MeasureClass::Quadratic:
            m.matrix = qo_matrix_for(spec.name, n, spec.params);
            break;
    }
    return m;
}

std::string MeasureSpec::to_string() const {
    std::string cls_name = cls == MeasureClass::Linear    ? "l"
                           : cls == MeasureClass::Nested  ? "b"
                                                          : "qo";
    std::string out = cls_name + ":" + name;
    std::vector<std::string> kv;
    char buf[64];
    if (params.r) kv.push_back("r=" + std::to_string(*params.r));
    if (params.s) kv.push_back("s=" + std::to_string(*params.s));
    if (params.q) kv.push_back("q=" + std::to_string(*params.q));
    if (params.tau) {
        std::snprintf(buf, sizeof buf, "tau=%g", *params.tau);
        kv.push_back(buf);
    }
    if (params.lambda_name) kv.push_back("lambda=" + *params.lambda_name);
    if (!kv.empty()) {
        out += ":";
        for (std::size_t i = 0; i < kv.size(); ++i)
            out += (i ? "," : "") + kv[i];
    }
    return out;
}

MeasureSpec parse_measure_spec(const std::string& text) {
    MeasureSpec spec;
    auto c1 = text.find(':');
    require(c1 != std::string::npos, "measure spec must look like <class>:<name>[:k=v,...]");
    std::string cls = text.substr(0, c1);
    if (cls == "l")
        spec.cls = MeasureClass::Linear;
    else if (cls == "b")
        spec.cls = MeasureClass::Nested;
    else if (cls == "qo")
        spec.cls = MeasureClass::Quadratic;
    else
        throw MeasureError("measure spec class must be l, b, or qo, got '" + cls + "'");

    auto c2 = text.find(':', c1 + 1);
    spec.name = text.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
    require(!spec.name.empty(), "measure spec has an empty name");
    if (c2 == std::string::npos) return spec;

    std::stringstream rest(text.substr(c2 + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        auto eq = item.find('=');
        require(eq != std::string::npos, "measure spec parameter '" + item + "' needs key=value");
        std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        try {
            if (key == "r")
                spec.params.r = std::stoi(value);
            else if (key == "s")
                spec.params.s = std::stoi(value);
            else if (key == "q")
                spec.params.q = std::stoi(value);
            else if (key == "tau")
                spec.params.tau = std::stod(value);
            else if (key == "lambda")
                spec.params.lambda_name = value;
            else
                throw MeasureError("measure spec: unknown parameter '" + key + "'");
        } catch (const std::logic_error& e) {
            throw MeasureError("measure spec: bad value for '" + key + "': " + value);
        }
    }
    return spec;
}

const std::vector<std::string>& linear_catalog_names() {
    static const std::vector<std::string> names = {
        "mean", "trim-mean", "win-mean", "range", "mid-mean", "median",
        "1quartile", "3quartile", "iqr", "madev-median", "gini-difs"};
    return names;
}

const std::vector<std::string>& nested_catalog_names() {
    static const std::vector<std::string> names = {
        "variance", "msdev-median", "msdev-max", "msdev-min", "madev-mean",
        "madev-median", "madev-max", "madev-min", "skewness", "kurtosis"};
    return names;
}

const std::vector<std::string>& quadratic_catalog_names() {
    static const std::vector<std::string> names = {
        "variance", "msdev-median", "msdev-max", "msdev-min",
        "trim-variance", "win-variance"};
    return names;
}

}  // namespace ordmeas
