#include "qkdsim/qsim.hpp"

#include <stdexcept>

namespace qkd {

ChannelParams::ChannelParams(double eps_b, double eps_p, double eps_bp)
    : eps_b(eps_b), eps_p(eps_p), eps_bp(eps_bp) {
    if (eps_b < 0.0 || eps_b > 1.0 || eps_p < 0.0 || eps_p > 1.0)
        throw std::invalid_argument("ChannelParams: rates must be in [0,1]");
    if (eps_bp < 0.0 || eps_bp > eps_b || eps_bp > eps_p)
        throw std::invalid_argument("ChannelParams: need 0 <= eps_bp <= min(eps_b, eps_p)");
    if (eps_b + eps_p - eps_bp > 1.0)
        throw std::invalid_argument("ChannelParams: need eps_b + eps_p - eps_bp <= 1");
}

EveStrategy EveStrategy::intercept_resend(double p) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("EveStrategy: intercept probability must be in [0,1]");
    return {p};
}

QubitState prepare(Basis basis, bool bit) {
    if (basis == Basis::Z) return bit ? QubitState::Z1 : QubitState::Z0;
    return bit ? QubitState::Xminus : QubitState::Xplus;
}

namespace {

Basis basis_of(QubitState s) {
    return (s == QubitState::Z0 || s == QubitState::Z1) ? Basis::Z : Basis::X;
}

bool bit_of(QubitState s) { return s == QubitState::Z1 || s == QubitState::Xminus; }

}  // namespace

MeasureResult measure(QubitState state, Basis basis, Rng& rng) {
    if (basis_of(state) == basis) return {bit_of(state), state};
    const bool bit = rng.next_bit();
    return {bit, prepare(basis, bit)};
}

QubitState apply_pauli(QubitState state, Pauli p) {
    switch (p) {
        case Pauli::I:
            return state;
        case Pauli::X:
            switch (state) {
                case QubitState::Z0: return QubitState::Z1;
                case QubitState::Z1: return QubitState::Z0;
                default: return state;  // X eigenstates, phase dropped
            }
        case Pauli::Z:
            switch (state) {
                case QubitState::Xplus: return QubitState::Xminus;
                case QubitState::Xminus: return QubitState::Xplus;
                default: return state;
            }
        case Pauli::Y:
            return apply_pauli(apply_pauli(state, Pauli::X), Pauli::Z);
    }
    return state;
}

QubitState channel_transmit(QubitState state, const ChannelParams& params, Rng& rng) {
    const double u = rng.next_unit();
    if (u < params.p_x()) return apply_pauli(state, Pauli::X);
    if (u < params.p_x() + params.p_z()) return apply_pauli(state, Pauli::Z);
    if (u < params.p_x() + params.p_z() + params.p_y()) return apply_pauli(state, Pauli::Y);
    return state;
}

QubitState eve_act(QubitState state, const EveStrategy& strategy, Rng& rng) {
    if (strategy.intercept_prob <= 0.0) return state;
    if (rng.next_unit() >= strategy.intercept_prob) return state;
    const Basis basis = rng.next_bit() ? Basis::X : Basis::Z;
    return measure(state, basis, rng).post_state;
}

}  // namespace qkd
