#include "debatenet/stats.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>

#include "debatenet/error.hpp"

namespace debatenet {

std::string to_string(TestMethod method) { return method == TestMethod::exact ? "exact" : "asymptotic"; }

TestResult chi_square(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size();
    if (rows < 2) throw InputError("chi-square needs at least two rows");
    const std::size_t cols = table.front().size();
    if (cols < 2) throw InputError("chi-square needs at least two columns");
    std::vector<double> row_total(rows, 0.0);
    std::vector<double> col_total(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        if (table[r].size() != cols) throw InputError("chi-square table rows differ in length");
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = table[r][c];
            if (!(v >= 0.0)) throw InputError("chi-square counts must be non-negative");
            row_total[r] += v;
            col_total[c] += v;
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_total[r] <= 0.0) throw InputError("chi-square row " + std::to_string(r) + " has a zero total");
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (col_total[c] <= 0.0) throw InputError("chi-square column " + std::to_string(c) + " has a zero total");
    }
    double grand = 0.0;
    for (double v : row_total) grand += v;

    double stat = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = row_total[r] * col_total[c] / grand;
            const double diff = table[r][c] - expected;
            stat += diff * diff / expected;
        }
    }
    const double df = static_cast<double>((rows - 1) * (cols - 1));
    TestResult out;
    out.statistic = stat;
    out.p_value = stat <= 0.0 ? 1.0 : boost::math::gamma_q(df / 2.0, stat / 2.0);
    out.n_a = rows;
    out.n_b = cols;
    out.method = TestMethod::asymptotic;
    return out;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double x;
        if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
            x = sa[i];
        } else {
            x = sb[j];
        }
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.0) {
        // Jacobi theta form, fast for small lambda.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double sum = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

void require_samples(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InputError("both samples must be non-empty");
}

// Calls fn(group_a, group_b) for every way of splitting the pooled sample into groups
// of the original sizes.
template <typename Fn>
void for_each_split(std::span<const double> a, std::span<const double> b, Fn&& fn) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size();
    std::vector<double> ga;
    std::vector<double> gb;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != a.size()) continue;
        ga.clear();
        gb.clear();
        for (std::size_t k = 0; k < n; ++k) ((mask >> k) & 1u ? ga : gb).push_back(pooled[k]);
        fn(std::span<const double>(ga), std::span<const double>(gb));
    }
}

}  // namespace

TestResult ks_test(std::span<const double> a, std::span<const double> b, std::size_t exact_limit) {
    require_samples(a, b);
    TestResult out;
    out.n_a = a.size();
    out.n_b = b.size();
    out.statistic = ks_statistic(a, b);
    if (a.size() + b.size() <= std::min<std::size_t>(exact_limit, 20)) {
        std::size_t total = 0;
        std::size_t extreme = 0;
        for_each_split(a, b, [&](std::span<const double> ga, std::span<const double> gb) {
            ++total;
            if (ks_statistic(ga, gb) >= out.statistic - 1e-12) ++extreme;
        });
        out.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        out.method = TestMethod::exact;
    } else {
        const double na = static_cast<double>(a.size());
        const double nb = static_cast<double>(b.size());
        const double effective = na * nb / (na + nb);
        out.p_value = kolmogorov_survival(std::sqrt(effective) * out.statistic);
        out.method = TestMethod::asymptotic;
    }
    return out;
}

double mann_whitney_statistic(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sb.begin(), sb.end());
    double u = 0.0;
    for (double x : a) {
        const auto lo = std::lower_bound(sb.begin(), sb.end(), x);
        const auto hi = std::upper_bound(lo, sb.end(), x);
        u += static_cast<double>(lo - sb.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return u;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, std::size_t exact_limit) {
    require_samples(a, b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double mean = na * nb / 2.0;

    TestResult out;
    out.n_a = a.size();
    out.n_b = b.size();
    out.statistic = mann_whitney_statistic(a, b);
    out.effect = out.statistic / (na * nb);
    const double observed = std::abs(out.statistic - mean);

    if (a.size() + b.size() <= std::min<std::size_t>(exact_limit, 20)) {
        std::size_t total = 0;
        std::size_t extreme = 0;
        for_each_split(a, b, [&](std::span<const double> ga, std::span<const double> gb) {
            ++total;
            if (std::abs(mann_whitney_statistic(ga, gb) - mean) >= observed - 1e-9) ++extreme;
        });
        out.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        out.method = TestMethod::exact;
        return out;
    }

    std::map<double, double> ties;
    for (double x : a) ties[x] += 1.0;
    for (double x : b) ties[x] += 1.0;
    const double n = na + nb;
    double tie_sum = 0.0;
    for (const auto& [value, t] : ties) tie_sum += t * t * t - t;
    const double variance = na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    out.method = TestMethod::asymptotic;
    if (variance <= 0.0) {
        out.p_value = 1.0;
        return out;
    }
    const double z = std::max(0.0, observed - 0.5) / std::sqrt(variance);
    out.p_value = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
    return out;
}

}  // namespace debatenet
