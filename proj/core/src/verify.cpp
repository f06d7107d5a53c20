#include "qkdsim/verify.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace qkd {

ParityStringSet gen_parity_strings(size_t n_s, size_t m, Rng& rng, Transcript& transcript,
                                   size_t subset_index) {
    if (m < 1 || m >= n_s)
        throw std::invalid_argument("gen_parity_strings: need 1 <= m < n_s");
    ParityStringSet set;
    set.strings.reserve(m);
    for (size_t j = 0; j < m; ++j) {
        BitVec r = BitVec::random_nonzero(n_s - j, rng);
        transcript.append(Party::Alice, kind::r_string,
                          nlohmann::json{{"subset", subset_index},
                                         {"round", j + 1},
                                         {"bits", r.to_hex()},
                                         {"len", r.size()}}
                              .dump());
        set.strings.push_back(std::move(r));
    }
    return set;
}

VerifyRoundResult verify_round(const BitVec& s_a, const BitVec& s_b, const BitVec& r,
                               Transcript& transcript, size_t subset_index,
                               size_t round_index) {
    if (s_a.size() != s_b.size() || s_a.size() != r.size())
        throw std::invalid_argument("verify_round: length mismatch");
    if (!r.any()) throw std::invalid_argument("verify_round: parity string is zero");

    const bool pa = dot(s_a, r);
    const bool pb = dot(s_b, r);
    auto ack = [&](bool p) {
        return nlohmann::json{
            {"subset", subset_index}, {"round", round_index}, {"parity", p ? 1 : 0}}
            .dump();
    };
    transcript.append(Party::Alice, kind::parity_ack, ack(pa));
    transcript.append(Party::Bob, kind::parity_ack, ack(pb));

    VerifyRoundResult out;
    if (pa != pb) return out;

    out.accepted = true;
    out.removed_position = r.last_nonzero_position();
    out.s_a = s_a;
    out.s_b = s_b;
    out.s_a.erase_position(out.removed_position);
    out.s_b.erase_position(out.removed_position);
    return out;
}

VerifyOutcome verify_subset(const BitVec& s_a, const BitVec& s_b,
                            const ParityStringSet& strings, Transcript& transcript,
                            size_t subset_index) {
    VerifyOutcome out;
    BitVec a = s_a, b = s_b;
    for (size_t j = 0; j < strings.strings.size(); ++j) {
        VerifyRoundResult r =
            verify_round(a, b, strings.strings[j], transcript, subset_index, j + 1);
        if (!r.accepted) {
            out.reject_round = j + 1;
            return out;
        }
        a = std::move(r.s_a);
        b = std::move(r.s_b);
    }
    out.accepted = true;
    out.survivors_a = std::move(a);
    out.survivors_b = std::move(b);
    return out;
}

}  // namespace qkd
