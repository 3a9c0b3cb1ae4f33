#include "xaudit/scaler.hpp"

#include <algorithm>
#include <cmath>

namespace xaudit {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<double> StandardScaler::standardize(const std::vector<double>& x) const {
    if (x.size() != dim()) throw InvalidArgument("standardize: dimension mismatch");
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (schema.is_continuous(j)) {
            z[j] = (x[j] - mean[j]) / stddev[j];
        } else {
            z[j] = x[j];
        }
    }
    return z;
}

std::vector<double> StandardScaler::unstandardize(const std::vector<double>& z) const {
    if (z.size() != dim()) throw InvalidArgument("unstandardize: dimension mismatch");
    std::vector<double> x(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (schema.is_continuous(j)) {
            x[j] = z[j] * stddev[j] + mean[j];
        } else {
            x[j] = z[j];
        }
    }
    return x;
}

StandardScaler fit_scaler(const Dataset& d) {
    d.validate();
    const std::size_t n = d.n();
    const std::size_t dim = d.dim();
    StandardScaler s;
    s.schema = d.schema;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 1.0);
    s.median.assign(dim, 0.0);
    s.mad.assign(dim, 1.0);
    s.min_value.assign(dim, 0.0);
    s.max_value.assign(dim, 0.0);
    s.is_constant.assign(dim, false);
    s.category_freq.assign(dim, {});

    std::vector<double> col(n);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = d.row(i)[j];
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        s.min_value[j] = *mn;
        s.max_value[j] = *mx;

        if (!d.schema.is_continuous(j)) {
            const std::size_t card = d.schema.features[j].cardinality();
            std::vector<double> freq(card, 0.0);
            for (double v : col) freq[static_cast<std::size_t>(v)] += 1.0;
            for (double& f : freq) f /= static_cast<double>(n);
            s.category_freq[j] = std::move(freq);
            s.is_constant[j] = (*mn == *mx);
            continue;
        }

        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);  // population variance
        const double sd = std::sqrt(var);

        s.mean[j] = mean;
        s.median[j] = median_of(col);
        if (sd < 1e-12) {
            s.is_constant[j] = true;
            s.stddev[j] = 1.0;
            s.mad[j] = 1.0;
        } else {
            s.stddev[j] = sd;
            std::vector<double> dev(n);
            for (std::size_t i = 0; i < n; ++i) dev[i] = std::fabs(col[i] - s.median[j]);
            const double mad = median_of(std::move(dev));
            // a zero MAD (over half the mass at the median) would blow up
            // MAD-weighted distances, so fall back to the scaled std
            s.mad[j] = (mad < 1e-12) ? 0.6745 * sd : mad;
        }
    }
    return s;
}

}  // namespace xaudit
