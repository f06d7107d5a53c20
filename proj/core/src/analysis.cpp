#include "qkdsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd {

PhaseUpdate phase_update(double eps_b, double eps_p, double eps_bp) {
    if (eps_b < 0.0 || eps_b >= 1.0)
        throw std::invalid_argument("phase_update: eps_b must be < 1");
    if (eps_p < 0.0 || eps_p > 1.0)
        throw std::invalid_argument("phase_update: eps_p must be in [0,1]");
    if (eps_bp < 0.0 || eps_bp > std::min(eps_b, eps_p) ||
        eps_b + eps_p - eps_bp > 1.0)
        throw std::invalid_argument("phase_update: invalid joint rate eps_bp");

    PhaseUpdate out;
    out.exact = std::clamp((eps_p - eps_bp) / (1.0 - eps_b), 0.0, 1.0);
    out.upper_bound = std::clamp(eps_p / (1.0 - eps_b), 0.0, 1.0);
    return out;
}

double epsilon1_confidence(double eta, double n, double eps_p) {
    if (eta <= 0.0) throw std::invalid_argument("epsilon1_confidence: eta must be > 0");
    if (n < 0.0) throw std::invalid_argument("epsilon1_confidence: n must be >= 0");
    if (eps_p < 0.0 || eps_p > 1.0)
        throw std::invalid_argument("epsilon1_confidence: eps_p must be in [0,1]");
    if (eps_p == 0.0 || eps_p == 1.0) return 1.0;
    const double variance = eps_p - eps_p * eps_p;
    return 1.0 - std::exp(-eta * eta * n / (4.0 * variance));
}

SubsetDiscard subset_discard_prob(size_t n_s, double eps) {
    if (n_s < 1) throw std::invalid_argument("subset_discard_prob: n_s must be >= 1");
    if (eps < 0.0 || eps > 1.0)
        throw std::invalid_argument("subset_discard_prob: eps must be in [0,1]");
    SubsetDiscard out;
    out.single_error = static_cast<double>(n_s) * eps *
                       std::pow(1.0 - eps, static_cast<double>(n_s) - 1.0);
    out.all_errors = 1.0 - std::pow(1.0 - eps, static_cast<double>(n_s));
    return out;
}

SuccessBound success_lower_bound(size_t g, size_t m, double eta, double n, double eps_p) {
    if (m < 1) throw std::invalid_argument("success_lower_bound: m must be >= 1");
    SuccessBound out;
    const double miss = std::ldexp(static_cast<double>(g), -static_cast<int>(m));
    if (miss >= 1.0) {
        out.vacuous = true;
        return out;
    }
    out.value = (1.0 - miss) * epsilon1_confidence(eta, n, eps_p);
    return out;
}

double key_correctness_bound(size_t g, size_t m) {
    const double miss = std::ldexp(static_cast<double>(g), -static_cast<int>(m));
    return std::max(0.0, 1.0 - miss);
}

}  // namespace qkd
