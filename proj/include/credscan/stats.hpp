#pragma once

// Rank and proportion statistics used by the lifetime and remediation
// reports: Kruskal-Wallis H with tie correction, two-proportion z-tests, and
// Cohen's h. Chi-square tails go through the regularized incomplete gamma
// function.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "credscan/util.hpp"

namespace credscan {

struct DomainError : Error {
    using Error::Error;
};
struct StatsInputError : Error {
    using Error::Error;
};

namespace stats_detail {

constexpr double kEps = 1e-15;
constexpr int kMaxIter = 500;

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), x > a + 1.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace stats_detail

// P(a, x): regularized lower incomplete gamma.
inline double regularized_gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw DomainError("regularized_gamma_p needs a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return stats_detail::gamma_p_series(a, x);
    return 1.0 - stats_detail::gamma_q_cf(a, x);
}

inline double regularized_gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw DomainError("regularized_gamma_q needs a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - stats_detail::gamma_p_series(a, x);
    return stats_detail::gamma_q_cf(a, x);
}

// Upper tail of the chi-square distribution with dof degrees of freedom.
inline double chi_square_sf(double x, int dof) {
    if (dof < 1) throw DomainError("chi_square_sf needs dof >= 1");
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(dof / 2.0, x / 2.0);
}

inline double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

struct KruskalWallisResult {
    double h = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool degenerate = false;  // all values identical across all groups
};

inline KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw StatsInputError("kruskal_wallis needs at least 2 groups");
    size_t n_total = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw StatsInputError("kruskal_wallis group is empty");
        n_total += g.size();
    }

    struct Tagged {
        double value;
        size_t group;
    };
    std::vector<Tagged> all;
    all.reserve(n_total);
    for (size_t gi = 0; gi < groups.size(); ++gi)
        for (double v : groups[gi]) all.push_back({v, gi});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

    std::vector<double> rank_sum(groups.size(), 0.0);
    double tie_sum = 0.0;  // sum of t^3 - t over tie groups
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        double t = static_cast<double>(j - i);
        if (j - i > 1) tie_sum += t * t * t - t;
        for (size_t k = i; k < j; ++k) rank_sum[all[k].group] += avg_rank;
        i = j;
    }

    const double n = static_cast<double>(n_total);
    double h = 0.0;
    for (size_t gi = 0; gi < groups.size(); ++gi)
        h += rank_sum[gi] * rank_sum[gi] / static_cast<double>(groups[gi].size());
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    KruskalWallisResult result;
    result.dof = static_cast<int>(groups.size()) - 1;
    const double correction = 1.0 - tie_sum / (n * n * n - n);
    if (correction <= 0.0) {
        // every value identical: no information, H = 0, p = 1
        result.degenerate = true;
        return result;
    }
    h /= correction;
    result.h = std::max(0.0, h);
    result.p_value = chi_square_sf(result.h, result.dof);
    return result;
}

// Arcsine-transformed effect size between two proportions.
inline double cohens_h(double p1, double p2) {
    if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
        throw DomainError("cohens_h: proportions must be in [0, 1]");
    return 2.0 * std::asin(std::sqrt(p1)) - 2.0 * std::asin(std::sqrt(p2));
}

struct TwoProportionResult {
    double z = 0.0;
    double p_value = 1.0;
    bool zero_variance = false;  // pooled proportion 0 or 1; z = 0, p = 1 by convention
};

inline TwoProportionResult two_proportion_z(long long successes1, long long n1,
                                            long long successes2, long long n2) {
    if (n1 < 1 || n2 < 1) throw StatsInputError("two_proportion_z needs n >= 1");
    if (successes1 < 0 || successes1 > n1 || successes2 < 0 || successes2 > n2)
        throw StatsInputError("two_proportion_z needs 0 <= successes <= n");
    const double p1 = static_cast<double>(successes1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(successes2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(successes1 + successes2) / static_cast<double>(n1 + n2);
    TwoProportionResult result;
    if (pooled <= 0.0 || pooled >= 1.0) {
        result.zero_variance = true;
        return result;
    }
    const double se = std::sqrt(pooled * (1.0 - pooled) *
                                (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    result.z = (p1 - p2) / se;
    result.p_value = normal_two_sided_p(result.z);
    return result;
}

struct EffectStats {
    double cohens_h = 0.0;
    double z_statistic = 0.0;
    double p_value = 1.0;
    bool zero_variance = false;
};

inline EffectStats proportion_effect(long long successes1, long long n1, long long successes2,
                                     long long n2) {
    EffectStats e;
    e.cohens_h = cohens_h(static_cast<double>(successes1) / static_cast<double>(n1),
                          static_cast<double>(successes2) / static_cast<double>(n2));
    auto zt = two_proportion_z(successes1, n1, successes2, n2);
    e.z_statistic = zt.z;
    e.p_value = zt.p_value;
    e.zero_variance = zt.zero_variance;
    return e;
}

}  // namespace credscan
