#include "xaudit/logistic.hpp"

#include <cmath>

#include "xaudit/linalg.hpp"

namespace xaudit {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

std::size_t LogisticModel::encoded_dim() const {
    std::size_t q = 0;
    for (const auto& f : schema.features) q += f.kind == FeatureKind::Continuous ? 1 : f.cardinality();
    return q;
}

std::vector<double> LogisticModel::encode(std::span<const double> x) const {
    if (x.size() != schema.dim()) throw InvalidArgument("logistic: dimension mismatch");
    std::vector<double> e;
    e.reserve(encoded_dim());
    for (std::size_t j = 0; j < schema.dim(); ++j) {
        const auto& f = schema.features[j];
        if (f.kind == FeatureKind::Continuous) {
            e.push_back((x[j] - col_shift[j]) / col_scale[j]);
        } else {
            const auto card = f.cardinality();
            const auto code = static_cast<long long>(std::llround(x[j]));
            for (std::size_t c = 0; c < card; ++c)
                e.push_back(code == static_cast<long long>(c) ? 1.0 : 0.0);
        }
    }
    return e;
}

double LogisticModel::logit(std::span<const double> x) const {
    const auto e = encode(x);
    double t = intercept;
    for (std::size_t k = 0; k < e.size(); ++k) t += weights[k] * e[k];
    return t;
}

double LogisticModel::score_impl(std::span<const double> x) const {
    const double t = logit(x);
    if (least_squares) return std::min(1.0, std::max(0.0, t));
    return sigmoid(t);
}

TrainOutput train_logistic(const Dataset& d, const LogisticParams& p) {
    if (p.l2 < 0) throw InvalidArgument("logistic: l2 must be >= 0");
    if (p.iterations < 1) throw InvalidArgument("logistic: iterations must be >= 1");

    auto model = std::make_shared<LogisticModel>();
    model->schema = d.schema;
    model->least_squares = p.least_squares;

    const std::size_t n = d.n();
    const std::size_t dim = d.dim();
    model->col_shift.assign(dim, 0.0);
    model->col_scale.assign(dim, 1.0);
    for (std::size_t j = 0; j < dim; ++j) {
        if (!d.schema.is_continuous(j)) continue;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += d.row(i)[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = d.row(i)[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        model->col_shift[j] = mean;
        model->col_scale[j] = var < 1e-24 ? 1.0 : std::sqrt(var);
    }

    const std::size_t q = model->encoded_dim();
    Matrix design(n, q + 1);  // column 0 = intercept
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = model->encode(d.row(i));
        design(i, 0) = 1.0;
        for (std::size_t k = 0; k < q; ++k) design(i, k + 1) = e[k];
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(d.labels[i]);

    TrainOutput out;
    std::vector<double> beta(q + 1, 0.0);

    if (p.least_squares) {
        std::vector<double> ones(n, 1.0);
        // the one-hot blocks are collinear with the intercept, so keep a
        // small floor on the ridge even when l2 = 0
        beta = weighted_ridge(design, y, ones, std::max(p.l2, 1e-8), false);
    } else {
        // damped Newton on the L2-penalized log-likelihood; the quadratic
        // subproblem is a weighted ridge regression on the working response
        bool converged = false;
        std::vector<double> wgt(n), z(n);
        for (int it = 0; it < p.iterations; ++it) {
            double max_step = 0.0;
            std::vector<double> eta(n);
            for (std::size_t i = 0; i < n; ++i) {
                double t = 0.0;
                for (std::size_t k = 0; k <= q; ++k) t += design(i, k) * beta[k];
                eta[i] = t;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double mu = sigmoid(eta[i]);
                const double v = std::max(mu * (1.0 - mu), 1e-9);
                wgt[i] = v;
                z[i] = eta[i] + (y[i] - mu) / v;
            }
            auto next = weighted_ridge(design, z, wgt, std::max(p.l2, 1e-8), false);
            for (std::size_t k = 0; k <= q; ++k) {
                const double step = p.learning_rate * (next[k] - beta[k]);
                beta[k] += step;
                max_step = std::max(max_step, std::fabs(step));
            }
            if (max_step < 1e-10) {
                converged = true;
                break;
            }
        }
        if (!converged)
            out.warnings.push_back("logistic solver did not converge; best iterate returned");
    }

    model->intercept = beta[0];
    model->weights.assign(beta.begin() + 1, beta.end());
    out.model = std::move(model);
    return out;
}

}  // namespace xaudit
