#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace debatenet {

enum class TestMethod { exact, asymptotic };

std::string to_string(TestMethod method);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> effect;  // Mann-Whitney common-language effect size
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    TestMethod method = TestMethod::asymptotic;
};

/// Pearson chi-square test of independence on an r x c table of counts (r, c >= 2).
/// Throws InputError on ragged tables, negative counts, or a zero row/column total.
TestResult chi_square(const std::vector<std::vector<double>>& table);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Kolmogorov distribution survival function P(K > lambda).
double kolmogorov_survival(double lambda);

inline constexpr std::size_t kKsExactLimit = 12;
inline constexpr std::size_t kMannWhitneyExactLimit = 10;

/// Two-sided two-sample KS test. Exact permutation p-value when n_a + n_b <= exact_limit,
/// asymptotic Kolmogorov otherwise. Throws InputError on an empty sample.
TestResult ks_test(std::span<const double> a, std::span<const double> b,
                   std::size_t exact_limit = kKsExactLimit);

/// U_a = #{a_i > b_j} + 0.5 #{a_i == b_j}.
double mann_whitney_statistic(std::span<const double> a, std::span<const double> b);

/// Two-sided Mann-Whitney U test. effect = U_a / (n_a n_b). Exact enumeration when
/// n_a + n_b <= exact_limit, otherwise the normal approximation with tie-corrected
/// variance and continuity correction. Throws InputError on an empty sample.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          std::size_t exact_limit = kMannWhitneyExactLimit);

}  // namespace debatenet
