#include "qkdsim/transcript.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace qkd {

std::string_view party_name(Party p) { return p == Party::Alice ? "A" : "B"; }

void Transcript::append(Party sender, std::string_view kind, std::string payload) {
    TranscriptRecord rec;
    rec.seq = records_.size();
    rec.sender = sender;
    rec.kind = std::string(kind);
    rec.payload = std::move(payload);
    records_.push_back(std::move(rec));
}

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

std::string bytes_to_hex(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(kHexDigits[c >> 4]);
        out.push_back(kHexDigits[c & 0xf]);
    }
    return out;
}

std::string hex_to_bytes(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("payload hex has odd length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw std::invalid_argument("payload hex has invalid digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<char>((nib(hex[i]) << 4) | nib(hex[i + 1])));
    return out;
}

}  // namespace

std::string Transcript::to_jsonl() const {
    std::string out;
    for (const auto& rec : records_) {
        out += "{\"seq\":";
        out += std::to_string(rec.seq);
        out += ",\"sender\":\"";
        out += party_name(rec.sender);
        out += "\",\"kind\":\"";
        out += rec.kind;
        out += "\",\"payload\":\"";
        out += bytes_to_hex(rec.payload);
        out += "\"}\n";
    }
    return out;
}

Transcript Transcript::from_jsonl(std::string_view text) {
    Transcript t;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;

        const auto j = nlohmann::json::parse(line);
        TranscriptRecord rec;
        rec.seq = j.at("seq").get<uint64_t>();
        const auto sender = j.at("sender").get<std::string>();
        if (sender == "A")
            rec.sender = Party::Alice;
        else if (sender == "B")
            rec.sender = Party::Bob;
        else
            throw std::invalid_argument("transcript record: bad sender");
        rec.kind = j.at("kind").get<std::string>();
        rec.payload = hex_to_bytes(j.at("payload").get<std::string>());
        if (rec.seq != t.records_.size())
            throw std::invalid_argument("transcript record: sequence gap");
        t.records_.push_back(std::move(rec));
    }
    return t;
}

}  // namespace qkd
