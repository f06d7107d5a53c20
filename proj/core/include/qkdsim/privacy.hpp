#pragma once

#include <cstddef>

#include "qkdsim/gf2.hpp"
#include "qkdsim/rng.hpp"
#include "qkdsim/transcript.hpp"

namespace qkd {

/// Key-length policy for build_code: key_len = floor(k * (1 - H2(eps1)))
/// minus a flat security margin, clamped to [0, k]. The policy is a
/// configurable stand-in, not a certified rate.
struct KeyLenPolicy {
    size_t security_margin = 10;
};

/// The announced code C_2 used for key extraction. C_1 is always the full
/// space F_2^k, so every k-bit string indexes a valid codeword and no
/// decoding search exists anywhere. The final key is the coset label
/// H2 . v, constant on v + C_2 and distinct across cosets.
struct CodeSpec {
    size_t block_len = 0;  // k
    size_t key_len = 0;
    BitMatrix g2;  // (k - key_len) x k generator of C_2, full row rank
    BitMatrix h2;  // key_len x k parity check of C_2
};

double binary_entropy(double p);

/// Draws a uniformly random full-rank generator for C_2 sized by the policy
/// and announces {k, key_len, G2} as a "code_spec" record. Aborts with
/// NoKeyCapacity when the policy leaves no key bits (eps1 too high; at
/// eps1 = 1/2 the capacity term vanishes entirely). Requires eps1 in [0, 1/2].
CodeSpec build_code(size_t k, double eps1, const KeyLenPolicy& policy, Rng& rng,
                    Transcript& transcript);

struct Announcement {
    BitVec v;          // Alice's private random string
    BitVec announced;  // x + v, public
};

/// Alice draws v uniformly over F_2^k and announces x + v ("xv_announce").
Announcement alice_announce(const BitVec& x, Rng& rng, Transcript& transcript);

/// Bob's recovery: announcement + x_b. Equals Alice's v exactly when
/// x_b == x; a bit error in x_b lands as the same bit error in v.
BitVec bob_recover(const BitVec& x_b, const BitVec& announcement);

struct KeyMaterial {
    BitVec key;
    Party side = Party::Alice;
};

/// Final key: the coset label H2 . v of v + C_2.
KeyMaterial extract_key(const BitVec& v, const CodeSpec& spec, Party side);

}  // namespace qkd
