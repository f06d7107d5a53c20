#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "qkdsim/qsim.hpp"

using namespace qkd;

namespace {

double binomial_3sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("prepare covers the four states") {
    CHECK(prepare(Basis::Z, false) == QubitState::Z0);
    CHECK(prepare(Basis::Z, true) == QubitState::Z1);
    CHECK(prepare(Basis::X, false) == QubitState::Xplus);
    CHECK(prepare(Basis::X, true) == QubitState::Xminus);
}

TEST_CASE("measure: same basis is deterministic and non-destructive") {
    Rng rng(1);
    for (Basis b : {Basis::Z, Basis::X}) {
        for (bool bit : {false, true}) {
            const QubitState s = prepare(b, bit);
            const MeasureResult r = measure(s, b, rng);
            CHECK(r.bit == bit);
            CHECK(r.post_state == s);
        }
    }
}

TEST_CASE("measure: cross basis is a fair coin and collapses") {
    Rng rng(2);
    size_t ones = 0;
    const size_t shots = 100000;
    for (size_t i = 0; i < shots; ++i) {
        const MeasureResult r = measure(QubitState::Xplus, Basis::Z, rng);
        ones += r.bit;
        CHECK(r.post_state == prepare(Basis::Z, r.bit));
    }
    const double mean = double(ones) / double(shots);
    CHECK(std::abs(mean - 0.5) < binomial_3sigma(0.5, shots));
}

TEST_CASE("apply_pauli action table") {
    CHECK(apply_pauli(QubitState::Z0, Pauli::X) == QubitState::Z1);
    CHECK(apply_pauli(QubitState::Z1, Pauli::X) == QubitState::Z0);
    CHECK(apply_pauli(QubitState::Xplus, Pauli::X) == QubitState::Xplus);
    CHECK(apply_pauli(QubitState::Xminus, Pauli::X) == QubitState::Xminus);

    CHECK(apply_pauli(QubitState::Xplus, Pauli::Z) == QubitState::Xminus);
    CHECK(apply_pauli(QubitState::Xminus, Pauli::Z) == QubitState::Xplus);
    CHECK(apply_pauli(QubitState::Z0, Pauli::Z) == QubitState::Z0);

    // Y acts as X then Z
    for (QubitState s : {QubitState::Z0, QubitState::Z1, QubitState::Xplus,
                         QubitState::Xminus}) {
        CHECK(apply_pauli(s, Pauli::Y) == apply_pauli(apply_pauli(s, Pauli::X), Pauli::Z));
        CHECK(apply_pauli(s, Pauli::I) == s);
    }
}

TEST_CASE("ChannelParams invariants and derived distribution") {
    const ChannelParams p(0.1, 0.1, 0.05);
    CHECK(p.p_x() == doctest::Approx(0.05));
    CHECK(p.p_z() == doctest::Approx(0.05));
    CHECK(p.p_y() == doctest::Approx(0.05));
    CHECK(p.p_i() == doctest::Approx(0.85));
    CHECK(p.p_x() + p.p_z() + p.p_y() + p.p_i() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(ChannelParams(0.1, 0.1, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(0.8, 0.8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(-0.1, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("channel_transmit: zero-noise channel is the identity") {
    Rng rng(3);
    const ChannelParams quiet;
    for (QubitState s : {QubitState::Z0, QubitState::Z1, QubitState::Xplus,
                         QubitState::Xminus}) {
        for (int i = 0; i < 100; ++i) CHECK(channel_transmit(s, quiet, rng) == s);
    }
}

TEST_CASE("channel_transmit: Monte Carlo marginals") {
    Rng rng(4);
    const ChannelParams params(0.1, 0.07, 0.03);
    const size_t shots = 1000000;

    size_t z_flips = 0, x_flips = 0;
    for (size_t i = 0; i < shots; ++i) {
        // bit flips are visible on Z-basis states
        if (channel_transmit(QubitState::Z0, params, rng) == QubitState::Z1) ++z_flips;
        // phase flips are visible on X-basis states
        if (channel_transmit(QubitState::Xplus, params, rng) == QubitState::Xminus)
            ++x_flips;
    }
    CHECK(std::abs(double(z_flips) / shots - params.eps_b) <
          binomial_3sigma(params.eps_b, shots));
    CHECK(std::abs(double(x_flips) / shots - params.eps_p) <
          binomial_3sigma(params.eps_p, shots));
}

TEST_CASE("eve_act: none leaves states untouched") {
    Rng rng(5);
    for (QubitState s : {QubitState::Z0, QubitState::Xminus})
        CHECK(eve_act(s, EveStrategy::none(), rng) == s);
}

TEST_CASE("eve_act: full intercept-resend produces QBER 1/4 on sifted traffic") {
    Rng alice(6), eve(7), bob(8);
    const EveStrategy strategy = EveStrategy::intercept_resend(1.0);
    const size_t sifted = 100000;
    size_t errors = 0;
    for (size_t i = 0; i < sifted; ++i) {
        const Basis basis = alice.next_bit() ? Basis::X : Basis::Z;
        const bool bit = alice.next_bit();
        QubitState s = prepare(basis, bit);
        s = eve_act(s, strategy, eve);
        // sifted position: Bob measured in Alice's basis
        if (measure(s, basis, bob).bit != bit) ++errors;
    }
    const double qber = double(errors) / double(sifted);
    CHECK(std::abs(qber - 0.25) < 0.01);
}

TEST_CASE("eve_act: zero intercept probability equals no eavesdropper") {
    const EveStrategy ir0 = EveStrategy::intercept_resend(0.0);
    Rng a(9), b(9);
    for (int i = 0; i < 1000; ++i) {
        const QubitState s =
            static_cast<QubitState>(i % 4);
        CHECK(eve_act(s, ir0, a) == eve_act(s, EveStrategy::none(), b));
    }
    CHECK(a.next_u64() == b.next_u64());  // neither consumed any randomness

    CHECK_THROWS_AS(EveStrategy::intercept_resend(1.5), std::invalid_argument);
}

TEST_CASE("identical seeds give identical trajectories") {
    Rng r1(123), r2(123);
    const ChannelParams params(0.2, 0.15, 0.1);
    for (int i = 0; i < 5000; ++i) {
        const QubitState s = static_cast<QubitState>(i % 4);
        CHECK(channel_transmit(s, params, r1) == channel_transmit(s, params, r2));
    }
}
