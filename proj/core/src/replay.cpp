#include "qkdsim/replay.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <vector>

namespace qkd {

namespace {

using nlohmann::json;

class Cursor {
  public:
    explicit Cursor(const Transcript& t) : records_(t.records()) {}

    bool done() const { return i_ >= records_.size(); }
    const TranscriptRecord& peek() const {
        if (done()) throw std::runtime_error("replay: transcript ended early");
        return records_[i_];
    }
    const TranscriptRecord& take(std::string_view kind) {
        const TranscriptRecord& r = peek();
        if (r.kind != kind)
            throw std::runtime_error("replay: expected '" + std::string(kind) +
                                     "' record, got '" + r.kind + "'");
        ++i_;
        return r;
    }

  private:
    const std::vector<TranscriptRecord>& records_;
    size_t i_ = 0;
};

json payload_of(const TranscriptRecord& r) { return json::parse(r.payload); }

BitVec bitvec_field(const json& j, const char* bits_key, const char* len_key) {
    return BitVec::from_hex(j.at(bits_key).get<std::string>(), j.at(len_key).get<size_t>());
}

}  // namespace

BitVec replay_key_from_transcript(const Transcript& transcript, const BitVec& my_bits) {
    Cursor cur(transcript);

    // Sift: both announced basis strings determine the kept positions.
    const BitVec bases_a = bitvec_field(payload_of(cur.take(kind::bases)), "bits", "len");
    const BitVec bases_b = bitvec_field(payload_of(cur.take(kind::bases)), "bits", "len");
    if (bases_a.size() != my_bits.size() || bases_b.size() != my_bits.size())
        throw std::runtime_error("replay: private record length does not match bases");

    std::vector<size_t> sifted;
    for (size_t i = 0; i < bases_a.size(); ++i)
        if (bases_a.get(i) == bases_b.get(i)) sifted.push_back(i);
    BitVec my_sifted = my_bits.gather(sifted);

    // Check selection: code positions are the sifted positions not named as
    // checks or discards.
    const json sel = payload_of(cur.take(kind::check_reveal));
    std::vector<bool> excluded(my_sifted.size(), false);
    for (const char* key : {"x_checks", "z_checks", "discards"})
        for (size_t idx : sel.at(key).get<std::vector<size_t>>()) excluded.at(idx) = true;
    std::vector<size_t> code;
    for (size_t i = 0; i < excluded.size(); ++i)
        if (!excluded[i]) code.push_back(i);
    BitVec my_code = my_sifted.gather(code);

    cur.take(kind::check_reveal);  // Alice's check values
    cur.take(kind::check_reveal);  // Bob's check values

    // Crude rounds: each pairing record is followed by both parity vectors.
    while (!cur.done() && cur.peek().kind == kind::pairing) {
        const json plan = payload_of(cur.take(kind::pairing));
        const auto perm = plan.at("perm").get<std::vector<uint32_t>>();
        if (perm.size() != my_code.size())
            throw std::runtime_error("replay: pairing does not cover current bits");

        const json ack_a = payload_of(cur.take(kind::parity_ack));
        const json ack_b = payload_of(cur.take(kind::parity_ack));
        const size_t pairs = perm.size() / 2;
        const BitVec pa = BitVec::from_hex(ack_a.at("parities").get<std::string>(), pairs);
        const BitVec pb = BitVec::from_hex(ack_b.at("parities").get<std::string>(), pairs);

        BitVec kept;
        for (size_t t = 0; t < pairs; ++t)
            if (pa.get(t) == pb.get(t)) kept.push_back(my_code.get(perm[2 * t]));
        my_code = std::move(kept);
    }

    // Verification: per subset, m announced strings then one parity pair per
    // round; an agreeing round removes the string's last nonzero position.
    BitVec my_x;
    size_t n_s = 0;
    while (!cur.done() && cur.peek().kind == kind::r_string) {
        std::vector<BitVec> strings;
        const size_t subset = payload_of(cur.peek()).at("subset").get<size_t>();
        while (!cur.done() && cur.peek().kind == kind::r_string &&
               payload_of(cur.peek()).at("subset").get<size_t>() == subset) {
            strings.push_back(bitvec_field(payload_of(cur.take(kind::r_string)), "bits", "len"));
        }
        if (n_s == 0) n_s = strings.at(0).size();

        BitVec mine(n_s);
        for (size_t i = 0; i < n_s; ++i) mine.set(i, my_code.get(subset * n_s + i));

        bool rejected = false;
        for (const BitVec& r : strings) {
            const json ack_a = payload_of(cur.take(kind::parity_ack));
            const json ack_b = payload_of(cur.take(kind::parity_ack));
            if (ack_a.at("parity").get<int>() != ack_b.at("parity").get<int>()) {
                rejected = true;
                break;
            }
            mine.erase_position(r.last_nonzero_position());
        }
        if (!rejected) my_x.append(mine);
    }

    // Code spec and x+v announcement close out the key.
    const json spec = payload_of(cur.take(kind::code_spec));
    const size_t k = spec.at("k").get<size_t>();
    const size_t g2_rows = spec.at("g2_rows").get<size_t>();
    const BitMatrix g2 = BitMatrix::from_row_major_bits(
        BitVec::from_hex(spec.at("g2").get<std::string>(), g2_rows * k), g2_rows, k);
    const BitMatrix h2 = parity_check_of(g2);

    const BitVec announced =
        bitvec_field(payload_of(cur.take(kind::xv_announce)), "bits", "len");
    if (my_x.size() != k || announced.size() != k)
        throw std::runtime_error("replay: surviving bits do not match code block");

    return mat_vec(h2, announced ^ my_x);
}

}  // namespace qkd
