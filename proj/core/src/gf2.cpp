#include "qkdsim/gf2.hpp"

#include <bit>
#include <stdexcept>
#include <utility>

namespace qkd {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

BitVec BitVec::ones(size_t len) {
    BitVec v(len);
    for (auto& w : v.words_) w = ~0ull;
    v.mask_tail();
    return v;
}

BitVec BitVec::random(size_t len, Rng& rng) {
    BitVec v(len);
    for (auto& w : v.words_) w = rng.next_u64();
    v.mask_tail();
    return v;
}

BitVec BitVec::random_nonzero(size_t len, Rng& rng) {
    if (len == 0) throw std::invalid_argument("random_nonzero: length must be >= 1");
    for (;;) {
        BitVec v = random(len, rng);
        if (v.any()) return v;
    }
}

BitVec BitVec::from_string(std::string_view bits) {
    BitVec v(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            v.set(i, true);
        } else if (bits[i] != '0') {
            throw std::invalid_argument("from_string: expected only '0'/'1'");
        }
    }
    return v;
}

BitVec BitVec::from_hex(std::string_view hex, size_t len) {
    if (hex.size() != (len + 3) / 4)
        throw std::invalid_argument("from_hex: digit count does not match bit length");
    BitVec v(len);
    for (size_t d = 0; d < hex.size(); ++d) {
        const int nibble = hex_value(hex[d]);
        if (nibble < 0) throw std::invalid_argument("from_hex: invalid hex digit");
        for (size_t k = 0; k < 4; ++k) {
            if ((nibble >> (3 - k)) & 1) {
                const size_t i = d * 4 + k;
                if (i >= len)
                    throw std::invalid_argument("from_hex: nonzero padding past bit length");
                v.set(i, true);
            }
        }
    }
    return v;
}

bool BitVec::get(size_t i) const {
    if (i >= len_) throw std::out_of_range("BitVec::get: index out of range");
    return (words_[i / 64] >> (i % 64)) & 1u;
}

void BitVec::set(size_t i, bool v) {
    if (i >= len_) throw std::out_of_range("BitVec::set: index out of range");
    const uint64_t mask = 1ull << (i % 64);
    if (v)
        words_[i / 64] |= mask;
    else
        words_[i / 64] &= ~mask;
}

void BitVec::flip(size_t i) {
    if (i >= len_) throw std::out_of_range("BitVec::flip: index out of range");
    words_[i / 64] ^= 1ull << (i % 64);
}

void BitVec::push_back(bool v) {
    ++len_;
    if (words_.size() * 64 < len_) words_.push_back(0);
    if (v) words_[(len_ - 1) / 64] |= 1ull << ((len_ - 1) % 64);
}

void BitVec::append(const BitVec& other) {
    for (size_t i = 0; i < other.size(); ++i) push_back(other.get(i));
}

size_t BitVec::popcount() const {
    size_t n = 0;
    for (uint64_t w : words_) n += static_cast<size_t>(std::popcount(w));
    return n;
}

bool BitVec::any() const {
    for (uint64_t w : words_)
        if (w) return true;
    return false;
}

size_t BitVec::last_nonzero_position() const {
    for (size_t wi = words_.size(); wi-- > 0;) {
        if (words_[wi]) {
            const size_t top = static_cast<size_t>(std::bit_width(words_[wi])) - 1;
            return wi * 64 + top + 1;  // 1-based
        }
    }
    return 0;
}

void BitVec::erase_position(size_t p) {
    if (p == 0 || p > len_) throw std::out_of_range("BitVec::erase_position: bad position");
    for (size_t i = p; i < len_; ++i) set(i - 1, get(i));
    --len_;
    words_.resize((len_ + 63) / 64);
    mask_tail();
}

BitVec BitVec::gather(const std::vector<size_t>& indices) const {
    BitVec out(indices.size());
    for (size_t k = 0; k < indices.size(); ++k) out.set(k, get(indices[k]));
    return out;
}

BitVec& BitVec::operator^=(const BitVec& other) {
    if (len_ != other.len_) throw std::invalid_argument("BitVec xor: length mismatch");
    for (size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
}

BitVec BitVec::operator~() const {
    BitVec out(*this);
    for (auto& w : out.words_) w = ~w;
    out.mask_tail();
    return out;
}

std::string BitVec::to_hex() const {
    std::string out((len_ + 3) / 4, '0');
    for (size_t d = 0; d < out.size(); ++d) {
        int nibble = 0;
        for (size_t k = 0; k < 4; ++k) {
            const size_t i = d * 4 + k;
            if (i < len_ && get(i)) nibble |= 1 << (3 - k);
        }
        out[d] = kHexDigits[nibble];
    }
    return out;
}

std::string BitVec::to_string() const {
    std::string out(len_, '0');
    for (size_t i = 0; i < len_; ++i)
        if (get(i)) out[i] = '1';
    return out;
}

void BitVec::mask_tail() {
    if (len_ % 64 != 0 && !words_.empty())
        words_.back() &= (1ull << (len_ % 64)) - 1;
}

bool dot(const BitVec& a, const BitVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    uint64_t acc = 0;
    const auto& wa = a.words();
    const auto& wb = b.words();
    for (size_t i = 0; i < wa.size(); ++i) acc ^= wa[i] & wb[i];
    return std::popcount(acc) & 1;
}

bool parity(const BitVec& a) {
    uint64_t acc = 0;
    for (uint64_t w : a.words()) acc ^= w;
    return std::popcount(acc) & 1;
}

BitMatrix BitMatrix::identity(size_t n) {
    BitMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitMatrix BitMatrix::random(size_t rows, size_t cols, Rng& rng) {
    BitMatrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i) m.row(i) = BitVec::random(cols, rng);
    return m;
}

BitMatrix BitMatrix::random_full_rank(size_t rows, size_t cols, Rng& rng) {
    if (rows > cols)
        throw std::invalid_argument("random_full_rank: rows must not exceed cols");
    for (;;) {
        BitMatrix m = random(rows, cols, rng);
        if (rank(m) == rows) return m;
    }
}

BitMatrix BitMatrix::from_row_major_bits(const BitVec& bits, size_t rows, size_t cols) {
    if (bits.size() != rows * cols)
        throw std::invalid_argument("from_row_major_bits: size mismatch");
    BitMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) m.set(r, c, bits.get(r * cols + c));
    return m;
}

BitVec BitMatrix::row_major_bits() const {
    BitVec out(rows_ * cols_);
    for (size_t r = 0; r < rows_; ++r)
        for (size_t c = 0; c < cols_; ++c) out.set(r * cols_ + c, get(r, c));
    return out;
}

namespace {

struct Rref {
    std::vector<BitVec> rows;
    std::vector<size_t> pivot_cols;  // ascending
};

// Reduced row echelon form. Pivot rule: leftmost nonzero column, first
// available row (deterministic so downstream constructions are reproducible).
Rref rref_of(const BitMatrix& m) {
    Rref out;
    out.rows.reserve(m.rows());
    for (size_t i = 0; i < m.rows(); ++i) out.rows.push_back(m.row(i));

    size_t next_row = 0;
    for (size_t col = 0; col < m.cols() && next_row < out.rows.size(); ++col) {
        size_t pivot = next_row;
        while (pivot < out.rows.size() && !out.rows[pivot].get(col)) ++pivot;
        if (pivot == out.rows.size()) continue;
        std::swap(out.rows[next_row], out.rows[pivot]);
        for (size_t i = 0; i < out.rows.size(); ++i) {
            if (i != next_row && out.rows[i].get(col)) out.rows[i] ^= out.rows[next_row];
        }
        out.pivot_cols.push_back(col);
        ++next_row;
    }
    return out;
}

}  // namespace

size_t rank(const BitMatrix& m) { return rref_of(m).pivot_cols.size(); }

BitVec mat_vec(const BitMatrix& m, const BitVec& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("mat_vec: dimension mismatch");
    BitVec out(m.rows());
    for (size_t i = 0; i < m.rows(); ++i) out.set(i, dot(m.row(i), v));
    return out;
}

BitMatrix parity_check_of(const BitMatrix& g) {
    const Rref rr = rref_of(g);
    if (rr.pivot_cols.size() != g.rows())
        throw std::invalid_argument("parity_check_of: generator matrix is rank-deficient");

    const size_t k = g.cols();
    const size_t r = rr.pivot_cols.size();

    std::vector<size_t> free_cols;
    free_cols.reserve(k - r);
    {
        size_t p = 0;
        for (size_t c = 0; c < k; ++c) {
            if (p < rr.pivot_cols.size() && rr.pivot_cols[p] == c)
                ++p;
            else
                free_cols.push_back(c);
        }
    }

    // One row per free column f: identity at f, and at each pivot column the
    // RREF entry of that pivot's row at f. Then h.row dot any RREF row is
    // rref[i][f] + rref[i][f] = 0, and the identity block makes H full rank.
    BitMatrix h(k - r, k);
    for (size_t j = 0; j < free_cols.size(); ++j) {
        const size_t f = free_cols[j];
        h.set(j, f, true);
        for (size_t i = 0; i < r; ++i)
            if (rr.rows[i].get(f)) h.set(j, rr.pivot_cols[i], true);
    }
    return h;
}

}  // namespace qkd
