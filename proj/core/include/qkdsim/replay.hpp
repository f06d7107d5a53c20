#pragma once

#include "qkdsim/gf2.hpp"
#include "qkdsim/transcript.hpp"

namespace qkd {

/// Recomputes a party's final key from the public transcript of a successful
/// session plus that party's private per-transmission bit record (Alice: the
/// bits she prepared; Bob: the bits he measured). Every keep/drop decision in
/// the protocol is a function of announced data only, so this must reproduce
/// run_session's key for the same side — the transcript-completeness audit.
///
/// Throws std::runtime_error if the transcript is malformed or does not
/// reach key extraction (aborted session).
BitVec replay_key_from_transcript(const Transcript& transcript, const BitVec& my_bits);

}  // namespace qkd
