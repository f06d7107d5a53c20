#include "qkdsim/privacy.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

#include "qkdsim/abort.hpp"

namespace qkd {

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p must be in [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

CodeSpec build_code(size_t k, double eps1, const KeyLenPolicy& policy, Rng& rng,
                    Transcript& transcript) {
    if (k < 1) throw std::invalid_argument("build_code: k must be >= 1");
    // eps1 = 1/2 is admitted and lands in NoKeyCapacity (H2(1/2) = 1).
    if (eps1 < 0.0 || eps1 > 0.5)
        throw std::invalid_argument("build_code: eps1 must be in [0, 1/2]");

    const double capacity = static_cast<double>(k) * (1.0 - binary_entropy(eps1));
    const long long key_len =
        static_cast<long long>(std::floor(capacity)) - static_cast<long long>(policy.security_margin);
    if (key_len <= 0) throw AbortError(AbortStage::Privacy, "NoKeyCapacity");

    CodeSpec spec;
    spec.block_len = k;
    spec.key_len = std::min<size_t>(static_cast<size_t>(key_len), k);
    spec.g2 = BitMatrix::random_full_rank(k - spec.key_len, k, rng);
    spec.h2 = parity_check_of(spec.g2);

    transcript.append(Party::Alice, kind::code_spec,
                      nlohmann::json{{"k", spec.block_len},
                                     {"key_len", spec.key_len},
                                     {"g2", spec.g2.row_major_bits().to_hex()},
                                     {"g2_rows", spec.g2.rows()},
                                     {"stream", "code"}}
                          .dump());
    return spec;
}

Announcement alice_announce(const BitVec& x, Rng& rng, Transcript& transcript) {
    Announcement ann;
    ann.v = BitVec::random(x.size(), rng);
    ann.announced = x ^ ann.v;
    transcript.append(Party::Alice, kind::xv_announce,
                      nlohmann::json{{"bits", ann.announced.to_hex()},
                                     {"len", ann.announced.size()}}
                          .dump());
    return ann;
}

BitVec bob_recover(const BitVec& x_b, const BitVec& announcement) {
    if (x_b.size() != announcement.size())
        throw std::invalid_argument("bob_recover: length mismatch");
    return announcement ^ x_b;
}

KeyMaterial extract_key(const BitVec& v, const CodeSpec& spec, Party side) {
    if (v.size() != spec.block_len)
        throw std::invalid_argument("extract_key: length does not match code block");
    return {mat_vec(spec.h2, v), side};
}

}  // namespace qkd
