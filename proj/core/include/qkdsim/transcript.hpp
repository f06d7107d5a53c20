#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qkd {

enum class Party : uint8_t { Alice, Bob };

std::string_view party_name(Party p);  // "A" / "B"

/// Stable record kinds appearing on the public classical channel.
namespace kind {
inline constexpr std::string_view bases = "bases";
inline constexpr std::string_view check_reveal = "check_reveal";
inline constexpr std::string_view pairing = "pairing";
inline constexpr std::string_view parity_ack = "parity_ack";
inline constexpr std::string_view r_string = "R_string";
inline constexpr std::string_view xv_announce = "xv_announce";
inline constexpr std::string_view code_spec = "code_spec";
inline constexpr std::string_view abort = "abort";
}  // namespace kind

/// One announced classical message. The payload is a UTF-8 JSON document
/// (kept as raw bytes here; hex-encoded in the JSONL export).
struct TranscriptRecord {
    uint64_t seq = 0;
    Party sender = Party::Alice;
    std::string kind;
    std::string payload;

    bool operator==(const TranscriptRecord&) const = default;
};

/// Ordered log of every message announced over the public channel during one
/// session. Sequence numbers are assigned on append and strictly increase.
class Transcript {
  public:
    void append(Party sender, std::string_view kind, std::string payload);

    const std::vector<TranscriptRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }

    /// One JSON object per line:
    /// {"seq":n,"sender":"A"|"B","kind":"...","payload":"<hex of payload bytes>"}
    std::string to_jsonl() const;

    static Transcript from_jsonl(std::string_view text);

    bool operator==(const Transcript&) const = default;

  private:
    std::vector<TranscriptRecord> records_;
};

}  // namespace qkd
