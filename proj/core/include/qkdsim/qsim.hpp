#pragma once

#include <cstdint>

#include "qkdsim/rng.hpp"

namespace qkd {

enum class Basis : uint8_t { Z, X };

/// The four BB84 states, global phase dropped. The set is closed under every
/// Pauli, which is all this protocol ever applies, so the four-state model is
/// exact here — no amplitudes needed.
enum class QubitState : uint8_t { Z0, Z1, Xplus, Xminus };

enum class Pauli : uint8_t { I, X, Y, Z };

/// Pauli channel marginals: eps_b is the bit-flip rate P(X or Y), eps_p the
/// phase-flip rate P(Z or Y), eps_bp the joint rate P(Y).
struct ChannelParams {
    double eps_b = 0.0;
    double eps_p = 0.0;
    double eps_bp = 0.0;

    ChannelParams() = default;
    /// Validates 0 <= eps_bp <= min(eps_b, eps_p) and
    /// eps_b + eps_p - eps_bp <= 1 (so P(identity) >= 0); throws otherwise.
    ChannelParams(double eps_b, double eps_p, double eps_bp);

    double p_x() const { return eps_b - eps_bp; }
    double p_z() const { return eps_p - eps_bp; }
    double p_y() const { return eps_bp; }
    double p_i() const { return 1.0 - eps_b - eps_p + eps_bp; }
};

/// Eavesdropper model: with probability intercept_prob, measure in a random
/// basis and forward the collapsed state. 0 means no eavesdropper.
struct EveStrategy {
    double intercept_prob = 0.0;

    static EveStrategy none() { return {}; }
    static EveStrategy intercept_resend(double p);
};

QubitState prepare(Basis basis, bool bit);

struct MeasureResult {
    bool bit;
    QubitState post_state;
};

/// Same basis: deterministic outcome, state unchanged. Cross basis: fair
/// coin, state collapses to prepare(basis, bit).
MeasureResult measure(QubitState state, Basis basis, Rng& rng);

QubitState apply_pauli(QubitState state, Pauli p);

/// Applies I/X/Z/Y with probabilities p_i/p_x/p_z/p_y from params.
QubitState channel_transmit(QubitState state, const ChannelParams& params, Rng& rng);

QubitState eve_act(QubitState state, const EveStrategy& strategy, Rng& rng);

}  // namespace qkd
