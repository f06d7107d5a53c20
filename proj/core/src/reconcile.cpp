#include "qkdsim/reconcile.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qkdsim/abort.hpp"

namespace qkd {

PairingPlan PairingPlan::random(size_t count, Rng& rng) {
    PairingPlan plan;
    plan.perm.resize(count);
    std::iota(plan.perm.begin(), plan.perm.end(), 0u);
    shuffle(plan.perm, rng);
    return plan;
}

std::optional<uint32_t> PairingPlan::leftover() const {
    if (perm.size() % 2 == 0) return std::nullopt;
    return perm.back();
}

void PairingPlan::validate() const {
    std::vector<bool> seen(perm.size(), false);
    for (uint32_t v : perm) {
        if (v >= perm.size() || seen[v])
            throw std::invalid_argument("PairingPlan: not a permutation");
        seen[v] = true;
    }
}

ResidualEstimate estimate_residual(double f) {
    if (f < 0.0 || f > 1.0)
        throw std::invalid_argument("estimate_residual: fraction must be in [0,1]");
    ResidualEstimate est;
    if (f > 0.5) {
        est.pre = 0.5;
        est.anomalous = true;
    } else {
        est.pre = (1.0 - std::sqrt(1.0 - 2.0 * f)) / 2.0;
    }
    const double e = est.pre;
    est.post = (e * e) / ((1.0 - e) * (1.0 - e) + e * e);
    return est;
}

CrudeRoundResult crude_round(const BitVec& alice_bits, const BitVec& bob_bits,
                             const PairingPlan& plan, Transcript& transcript,
                             size_t round_index) {
    if (alice_bits.size() != bob_bits.size())
        throw std::invalid_argument("crude_round: length mismatch");
    if (alice_bits.size() < 2)
        throw std::invalid_argument("crude_round: need at least two bits");
    if (plan.perm.size() != alice_bits.size())
        throw std::invalid_argument("crude_round: plan does not cover the index range");
    plan.validate();

    const size_t pairs = plan.pair_count();
    BitVec parities_a(pairs), parities_b(pairs);
    for (size_t t = 0; t < pairs; ++t) {
        const uint32_t j = plan.perm[2 * t];
        const uint32_t k = plan.perm[2 * t + 1];
        parities_a.set(t, alice_bits.get(j) ^ alice_bits.get(k));
        parities_b.set(t, bob_bits.get(j) ^ bob_bits.get(k));
    }

    const nlohmann::json meta{{"round", round_index}, {"pairs", pairs}};
    auto ack = [&](const BitVec& p) {
        nlohmann::json j = meta;
        j["parities"] = p.to_hex();
        return j.dump();
    };
    transcript.append(Party::Alice, kind::parity_ack, ack(parities_a));
    transcript.append(Party::Bob, kind::parity_ack, ack(parities_b));

    CrudeRoundResult out;
    out.stats.round = round_index;
    out.stats.input_bits = alice_bits.size();
    out.stats.pairs = pairs;
    out.stats.parity_bits_announced = pairs;
    for (size_t t = 0; t < pairs; ++t) {
        if (parities_a.get(t) == parities_b.get(t)) {
            const uint32_t j = plan.perm[2 * t];
            out.kept_a.push_back(alice_bits.get(j));
            out.kept_b.push_back(bob_bits.get(j));
        } else {
            ++out.stats.disagreements;
        }
    }
    out.stats.kept = out.kept_a.size();

    const double f = pairs == 0 ? 0.0
                                : static_cast<double>(out.stats.disagreements) /
                                      static_cast<double>(pairs);
    const ResidualEstimate est = estimate_residual(f);
    out.stats.residual_estimate = est.post;
    out.stats.anomalous = est.anomalous;
    return out;
}

CascadeResult crude_cascade(BitVec alice_bits, BitVec bob_bits, double target_residual,
                            size_t max_rounds, Rng& rng, Transcript& transcript) {
    if (target_residual <= 0.0 || target_residual >= 1.0)
        throw std::invalid_argument("crude_cascade: target_residual must be in (0,1)");
    if (max_rounds < 1) throw std::invalid_argument("crude_cascade: max_rounds must be >= 1");

    CascadeResult out;
    for (size_t round = 1;; ++round) {
        if (alice_bits.size() < 2)
            throw AbortError(AbortStage::Reconcile, "PopulationExhausted");

        const PairingPlan plan = PairingPlan::random(alice_bits.size(), rng);
        transcript.append(Party::Alice, kind::pairing,
                          nlohmann::json{{"round", round}, {"perm", plan.perm}}.dump());

        CrudeRoundResult r = crude_round(alice_bits, bob_bits, plan, transcript, round);
        alice_bits = std::move(r.kept_a);
        bob_bits = std::move(r.kept_b);
        out.rounds.push_back(r.stats);

        if (!r.stats.anomalous && r.stats.residual_estimate <= target_residual) break;
        if (round == max_rounds)
            throw AbortError(AbortStage::Reconcile, "RoundsExhausted");
    }
    out.alice_bits = std::move(alice_bits);
    out.bob_bits = std::move(bob_bits);
    return out;
}

std::vector<std::pair<BitVec, BitVec>> partition_subsets(const BitVec& alice_bits,
                                                         const BitVec& bob_bits,
                                                         size_t n_s) {
    if (alice_bits.size() != bob_bits.size())
        throw std::invalid_argument("partition_subsets: length mismatch");
    if (n_s == 0) throw std::invalid_argument("partition_subsets: n_s must be >= 1");
    if (alice_bits.size() < n_s) throw AbortError(AbortStage::Reconcile, "TooFewBits");

    const size_t q = alice_bits.size() / n_s;
    std::vector<std::pair<BitVec, BitVec>> subsets;
    subsets.reserve(q);
    for (size_t s = 0; s < q; ++s) {
        BitVec a(n_s), b(n_s);
        for (size_t i = 0; i < n_s; ++i) {
            a.set(i, alice_bits.get(s * n_s + i));
            b.set(i, bob_bits.get(s * n_s + i));
        }
        subsets.emplace_back(std::move(a), std::move(b));
    }
    return subsets;
}

}  // namespace qkd
