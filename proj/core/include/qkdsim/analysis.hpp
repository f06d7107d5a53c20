#pragma once

#include <cstddef>

namespace qkd {

/// Phase-error rate among bits that survive bit-flip correction.
/// exact       = (eps_p - eps_bp) / (1 - eps_b), the true posterior;
/// upper_bound = eps_p / (1 - eps_b), the worst case (eps_bp = 0).
/// Both are clamped to [0,1]; exact <= upper_bound always.
struct PhaseUpdate {
    double exact = 0.0;
    double upper_bound = 0.0;
};

/// Requires eps_b < 1 and valid channel marginals.
PhaseUpdate phase_update(double eps_b, double eps_p, double eps_bp);

/// Confidence that the code-bit phase rate stays within eta of the check-bit
/// estimate: 1 - exp(-eta^2 n / (4 (eps_p - eps_p^2))), with n the check-bit
/// count. Defined as 1 when eps_p is exactly 0 or 1 (zero-variance estimate).
double epsilon1_confidence(double eta, double n, double eps_p);

/// Probability that verification rejects a subset of n_s bits carrying
/// residual error rate eps.
/// single_error = n_s eps (1-eps)^(n_s-1), the one-error term only (a slight
/// underestimate); all_errors = 1 - (1-eps)^n_s, the probability of any error
/// at all (an upper bracket, since detection can miss). The empirical rate
/// lands between the two.
struct SubsetDiscard {
    double single_error = 0.0;
    double all_errors = 0.0;
};

SubsetDiscard subset_discard_prob(size_t n_s, double eps);

/// (1 - g 2^-m) * epsilon1_confidence(eta, n, eps_p). When g 2^-m >= 1 the
/// bound carries no information; value is 0 and vacuous is set.
struct SuccessBound {
    double value = 0.0;
    bool vacuous = false;
};

SuccessBound success_lower_bound(size_t g, size_t m, double eta, double n, double eps_p);

/// Probability that all g accepted subsets are truly error-free:
/// max(0, 1 - g 2^-m).
double key_correctness_bound(size_t g, size_t m);

}  // namespace qkd
