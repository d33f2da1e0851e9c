#pragma once

// Independent reference computations used only by the tests. They share no
// code with the library and favour obviousness over speed.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Direct-formula Pearson r in extended precision.
inline long double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps, int depth,
                               double fa, double fm, double fb, double whole) {
    const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
    return adaptive_simpson(f, a, m, eps / 2, depth - 1, fa, flm, fm, left) +
           adaptive_simpson(f, m, b, eps / 2, depth - 1, fm, frm, fb, right);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
    return adaptive_simpson(f, a, b, eps, 50, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb));
}

/// Two-tailed Student-t p for correlation r over n points, by quadrature of
/// the t density. With s = sqrt(df) tan(theta) the density becomes
/// c cos^(df-1)(theta) on a finite interval.
inline double t_test_p(double r, std::size_t n) {
    const double df = static_cast<double>(n - 2);
    const double t = std::fabs(r) * std::sqrt(df / ((1 - r) * (1 + r)));
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(std::numbers::pi);
    const double upper = std::atan(t / std::sqrt(df));
    const double inside = 2 * integrate([&](double th) { return c * std::pow(std::cos(th), df - 1); }, 0.0, upper);
    return 1.0 - inside;
}

/// Minimum over every monotone, continuous warping path, summed forward.
inline double dtw_exhaustive(const std::vector<double>& a, const std::vector<double>& b, bool squared = false) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        const double d = a[i] - b[j];
        acc = acc + (squared ? d * d : std::fabs(d));
        if (i + 1 == a.size() && j + 1 == b.size()) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
        if (i + 1 < a.size()) walk(i + 1, j, acc);
        if (j + 1 < b.size()) walk(i, j + 1, acc);
    };
    // The first cell's cost is added to an exact zero, as in the DP.
    walk(0, 0, 0.0);
    return best;
}

struct BruteSplit {
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

/// Tries every feature and every midpoint between distinct sorted values,
/// scoring children by two-pass SSE summed over outputs.
inline std::optional<BruteSplit> best_split(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                            std::size_t min_leaf = 1) {
    std::optional<BruteSplit> best;
    auto sse_of = [&](const std::vector<Eigen::Index>& rows) {
        long double total = 0;
        for (Eigen::Index o = 0; o < y.cols(); ++o) {
            long double mean = 0;
            for (auto r : rows) mean += y(r, o);
            mean /= rows.size();
            for (auto r : rows) total += (y(r, o) - mean) * (y(r, o) - mean);
        }
        return static_cast<double>(total);
    };
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        std::vector<double> values(x.col(f).data(), x.col(f).data() + x.rows());
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double thr = values[k] + (values[k + 1] - values[k]) / 2;
            std::vector<Eigen::Index> left, right;
            for (Eigen::Index r = 0; r < x.rows(); ++r) (x(r, f) <= thr ? left : right).push_back(r);
            if (left.size() < min_leaf || right.size() < min_leaf) continue;
            const double sse = sse_of(left) + sse_of(right);
            if (!best || sse < best->sse) best = BruteSplit{static_cast<std::size_t>(f), thr, sse};
        }
    }
    return best;
}

/// Root-mean-square of one column difference, two-pass in long double.
inline double rmse_column(const Eigen::MatrixXd& p, const Eigen::MatrixXd& t, Eigen::Index col) {
    long double s = 0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) s += (long double)(p(i, col) - t(i, col)) * (p(i, col) - t(i, col));
    return static_cast<double>(std::sqrt(s / p.rows()));
}

}  // namespace oracle
