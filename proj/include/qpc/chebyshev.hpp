#pragma once

// Chebyshev interpolation on [a, b] at first-kind nodes.

#include <cmath>
#include <functional>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"
#include "jet.hpp"

namespace qpc {

// x_j = mid + half cos(pi (j + 1/2) / n), j = 0..n-1
inline std::vector<double> chebyshev_nodes(double a, double b, int n) {
    std::vector<double> x(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j < n; ++j) x[j] = mid + half * std::cos(pi * (j + 0.5) / n);
    return x;
}

// Midpoints between consecutive nodes, used for the residual estimate.
inline std::vector<double> chebyshev_midpoints(double a, double b, int n) {
    std::vector<double> x(n - 1);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j + 1 < n; ++j) x[j] = mid + half * std::cos(pi * (j + 1.0) / n);
    return x;
}

class ChebyshevSeries {
public:
    ChebyshevSeries() = default;
    ChebyshevSeries(double a, double b, std::vector<double> coeffs) : a_(a), b_(b), c_(std::move(coeffs)) {}

    // From samples at chebyshev_nodes(a, b, n).
    static ChebyshevSeries from_samples(double a, double b, const std::vector<double>& f) {
        const int n = static_cast<int>(f.size());
        if (n == 0) throw PreconditionFailed("chebyshev: no samples");
        std::vector<double> c(n, 0.0);
        for (int k = 0; k < n; ++k) {
            double s = 0;
            for (int j = 0; j < n; ++j) s += f[j] * std::cos(pi * k * (j + 0.5) / n);
            c[k] = (k == 0 ? 1.0 : 2.0) * s / n;
        }
        return ChebyshevSeries(a, b, std::move(c));
    }

    static ChebyshevSeries interpolate(double a, double b, int n, const std::function<double(double)>& f) {
        auto x = chebyshev_nodes(a, b, n);
        std::vector<double> v(n);
        for (int j = 0; j < n; ++j) v[j] = f(x[j]);
        return from_samples(a, b, v);
    }

    double lo() const { return a_; }
    double hi() const { return b_; }
    const std::vector<double>& coefficients() const { return c_; }
    int size() const { return static_cast<int>(c_.size()); }

    double operator()(double x) const { return clenshaw(c_, to_unit(x)); }

    // Series of the derivative with respect to x.
    ChebyshevSeries derivative() const {
        const int n = static_cast<int>(c_.size());
        if (n <= 1) return ChebyshevSeries(a_, b_, {0.0});
        std::vector<double> d(n - 1, 0.0);
        // c'_{k-1} = c'_{k+1} + 2 k c_k
        for (int k = n - 1; k >= 1; --k) {
            double next = (k + 1 < n - 1) ? d[k + 1] : 0.0;
            d[k - 1] = next + 2.0 * k * c_[k];
        }
        d[0] *= 0.5;
        double scale = 2.0 / (b_ - a_);
        for (auto& v : d) v *= scale;
        return ChebyshevSeries(a_, b_, std::move(d));
    }

    Jet jet(double x0, int K) const {
        Jet j(x0, K);
        ChebyshevSeries d = *this;
        double fact = 1;
        for (int k = 0; k <= K; ++k) {
            if (k > 0) {
                d = d.derivative();
                fact *= k;
            }
            j.c[k] = d(x0) / fact;
        }
        return j;
    }

    // largest |c_k| over the last quarter of the coefficients
    double tail() const {
        double t = 0;
        for (std::size_t k = c_.size() - c_.size() / 4; k < c_.size(); ++k) t = std::max(t, std::fabs(c_[k]));
        return t;
    }

private:
    double to_unit(double x) const { return (2.0 * x - (a_ + b_)) / (b_ - a_); }

    static double clenshaw(const std::vector<double>& c, double t) {
        double b1 = 0, b2 = 0;
        for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
            double b0 = 2.0 * t * b1 - b2 + c[k];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }

    double a_ = -1, b_ = 1;
    std::vector<double> c_{0.0};
};

}  // namespace qpc
