#include <algorithm>
#include <cmath>

#include "contextox/errors.hpp"
#include "contextox/evaluation.hpp"

namespace contextox::evaluation {

double kolmogorov_sf(double lambda) {
    // Piecewise evaluation of Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2k^2 lambda^2},
    // switching to the theta-function form for small arguments where the
    // alternating series converges slowly (the classic TMath::KolmogorovProb
    // regimes).
    const double u = std::abs(lambda);
    if (u < 0.2) return 1.0;
    if (u < 0.755) {
        static const double kSqrt2Pi = 2.5066282746310002;
        const double c1 = -M_PI * M_PI / 8.0;
        const double v = 1.0 / (u * u);
        return 1.0 - kSqrt2Pi *
                         (std::exp(c1 * v) + std::exp(9.0 * c1 * v) + std::exp(25.0 * c1 * v)) / u;
    }
    if (u >= 6.8116) return 0.0;
    const double v = u * u;
    double sum = 0.0;
    const int terms = std::max(1, static_cast<int>(std::lround(3.0 / u)));
    for (int k = 1; k <= terms; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        sum += sign * std::exp(-2.0 * k * k * v);
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_2sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw ConfigError("ks_2sample requires two non-empty samples");
    }
    std::vector<double> sa = a;
    std::vector<double> sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        // Consume every element tied at the next breakpoint on both sides
        // before evaluating the ECDF gap: ties never inflate D.
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    KsResult result;
    result.d = d;
    const double n_eff = na * nb / (na + nb);
    result.p_value = kolmogorov_sf(std::sqrt(n_eff) * d);
    return result;
}

} // namespace contextox::evaluation
