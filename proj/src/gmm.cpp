#include "pgdf/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pgdf/errors.hpp"

namespace pgdf {

namespace {

constexpr double kVarianceFloor = 1e-6;

double percentile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// log N(x | mean, var)
double log_gauss(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
}

} // namespace

GmmModel fit_em(const std::vector<double>& losses, int max_iter, double tol) {
    if (losses.size() < 4) throw usage_error("fit_em: need at least 4 losses");
    for (double v : losses)
        if (!std::isfinite(v)) throw numeric_fault("fit_em: non-finite loss");

    const auto [mn_it, mx_it] = std::minmax_element(losses.begin(), losses.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx - mn < 1e-12)
        throw degenerate_error("fit_em: all losses identical, no separation evidence");

    const std::size_t n = losses.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (losses[i] - mn) / (mx - mn);

    GmmModel model;
    model.loss_min = mn;
    model.loss_max = mx;

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double mean_all = 0.0;
    for (double v : x) mean_all += v;
    mean_all /= static_cast<double>(n);
    double var_all = 0.0;
    for (double v : x) var_all += (v - mean_all) * (v - mean_all);
    var_all = std::max(var_all / static_cast<double>(n), kVarianceFloor);

    model.mean[0] = percentile(sorted, 0.10);
    model.mean[1] = percentile(sorted, 0.90);
    model.variance[0] = model.variance[1] = var_all;
    model.weight[0] = model.weight[1] = 0.5;

    std::vector<double> resp0(n);
    double prev_ll = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        // E-step (log-space for stability) and log-likelihood at current params.
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l0 = std::log(model.weight[0]) + log_gauss(x[i], model.mean[0], model.variance[0]);
            const double l1 = std::log(model.weight[1]) + log_gauss(x[i], model.mean[1], model.variance[1]);
            const double hi = std::max(l0, l1);
            const double lse = hi + std::log(std::exp(l0 - hi) + std::exp(l1 - hi));
            resp0[i] = std::exp(l0 - lse);
            ll += lse;
        }
        if (iter > 0 && ll < prev_ll - 1e-9)
            throw numeric_fault("fit_em: log-likelihood decreased at iteration " +
                                std::to_string(iter));
        model.loglik_trace.push_back(ll);
        model.iterations = iter + 1;
        if (iter > 0 && std::abs(ll - prev_ll) < tol) break;
        prev_ll = ll;

        // M-step
        double r0 = 0.0, s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r0 += resp0[i];
            s0 += resp0[i] * x[i];
            s1 += (1.0 - resp0[i]) * x[i];
        }
        const double r1 = static_cast<double>(n) - r0;
        model.weight[0] = r0 / static_cast<double>(n);
        model.weight[1] = r1 / static_cast<double>(n);
        if (r0 > 0.0) model.mean[0] = s0 / r0;
        if (r1 > 0.0) model.mean[1] = s1 / r1;
        double v0 = 0.0, v1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = x[i] - model.mean[0];
            const double d1 = x[i] - model.mean[1];
            v0 += resp0[i] * d0 * d0;
            v1 += (1.0 - resp0[i]) * d1 * d1;
        }
        model.variance[0] = std::max(r0 > 0.0 ? v0 / r0 : kVarianceFloor, kVarianceFloor);
        model.variance[1] = std::max(r1 > 0.0 ? v1 / r1 : kVarianceFloor, kVarianceFloor);
    }

    if (model.mean[0] > model.mean[1]) {
        std::swap(model.mean[0], model.mean[1]);
        std::swap(model.variance[0], model.variance[1]);
        std::swap(model.weight[0], model.weight[1]);
    }
    return model;
}

std::vector<double> posterior_clean(const std::vector<double>& losses, const GmmModel& model) {
    std::vector<double> w(losses.size());
    const double span = model.loss_max - model.loss_min;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const double xi = std::clamp((losses[i] - model.loss_min) / span, 0.0, 1.0);
        const double l0 = std::log(model.weight[0]) + log_gauss(xi, model.mean[0], model.variance[0]);
        const double l1 = std::log(model.weight[1]) + log_gauss(xi, model.mean[1], model.variance[1]);
        const double hi = std::max(l0, l1);
        const double lse = hi + std::log(std::exp(l0 - hi) + std::exp(l1 - hi));
        w[i] = std::exp(l0 - lse);
    }
    return w;
}

} // namespace pgdf
