#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qkdsim/rng.hpp"

namespace qkd {

/// Packed GF(2) bit vector. Bits live in 64-bit words, bit i of the vector at
/// word i/64, bit i%64; bits past size() are kept zero so equality and
/// word-level ops see a canonical form.
///
/// get/set/flip take 0-based indices. The protocol-position helpers
/// (last_nonzero_position, erase_position) speak 1-based positions, matching
/// how parity strings address bits p_1..p_k throughout this library.
class BitVec {
  public:
    BitVec() = default;
    explicit BitVec(size_t len) : len_(len), words_((len + 63) / 64, 0) {}

    static BitVec ones(size_t len);
    /// Vector of fair-coin bits.
    static BitVec random(size_t len, Rng& rng);
    /// Fair-coin bits, resampled until nonzero. len must be >= 1.
    static BitVec random_nonzero(size_t len, Rng& rng);
    /// Parse "0101..." (test convenience; leftmost char is bit 0).
    static BitVec from_string(std::string_view bits);
    /// Inverse of to_hex(); `len` is the explicit bit length. Rejects
    /// non-hex digits, wrong digit counts, and nonzero padding bits.
    static BitVec from_hex(std::string_view hex, size_t len);

    size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool get(size_t i) const;
    void set(size_t i, bool v);
    void flip(size_t i);
    void push_back(bool v);
    void append(const BitVec& other);

    size_t popcount() const;
    bool any() const;

    /// 1-based position of the last set bit (the p_k of a parity string),
    /// or 0 if the vector is all-zero.
    size_t last_nonzero_position() const;
    /// Remove the bit at 1-based position p; bits above shift down by one.
    void erase_position(size_t p);

    /// New vector of bits at `indices` (0-based), in the given order.
    BitVec gather(const std::vector<size_t>& indices) const;

    BitVec& operator^=(const BitVec& other);
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
    BitVec operator~() const;

    bool operator==(const BitVec& other) const = default;

    /// Lowercase hex, most significant nibble first: bit 0 is the top bit of
    /// the first nibble, tail padded with zero bits to a whole digit. The bit
    /// length travels separately (see from_hex).
    std::string to_hex() const;
    std::string to_string() const;

    const std::vector<uint64_t>& words() const { return words_; }

  private:
    void mask_tail();

    size_t len_ = 0;
    std::vector<uint64_t> words_;
};

/// Mod-2 inner product a.b (parity of the AND). Lengths must match.
bool dot(const BitVec& a, const BitVec& b);

/// XOR of all bits; equals dot(a, all-ones).
bool parity(const BitVec& a);

/// Dense GF(2) matrix, a row-major sequence of equal-length BitVec rows.
class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols)
        : rows_(rows), cols_(cols), data_(rows, BitVec(cols)) {}

    static BitMatrix identity(size_t n);
    static BitMatrix random(size_t rows, size_t cols, Rng& rng);
    /// Uniformly random matrix conditioned on full row rank (resampled).
    /// Requires rows <= cols.
    static BitMatrix random_full_rank(size_t rows, size_t cols, Rng& rng);
    /// Rebuild from row-major bits (inverse of row_major_bits()).
    static BitMatrix from_row_major_bits(const BitVec& bits, size_t rows, size_t cols);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    const BitVec& row(size_t i) const { return data_[i]; }
    BitVec& row(size_t i) { return data_[i]; }

    bool get(size_t r, size_t c) const { return data_[r].get(c); }
    void set(size_t r, size_t c, bool v) { data_[r].set(c, v); }

    /// All rows concatenated into one BitVec of rows*cols bits.
    BitVec row_major_bits() const;

    bool operator==(const BitMatrix& other) const = default;

  private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<BitVec> data_;
};

/// GF(2) row rank (Gaussian elimination on a copy; input untouched).
size_t rank(const BitMatrix& m);

/// GF(2) matrix-vector product; m.cols() must equal v.size().
BitVec mat_vec(const BitMatrix& m, const BitVec& v);

/// Parity-check matrix of the row space of G: returns H with cols(G)-rank(G)
/// rows, full row rank, and H.w = 0 exactly for w in rowspace(G). Two vectors
/// get equal H-images iff they lie in the same coset of rowspace(G).
///
/// G must have full row rank (throws std::invalid_argument otherwise).
/// Elimination pivots on the leftmost nonzero column, first available row,
/// so the result is reproducible across runs.
BitMatrix parity_check_of(const BitMatrix& g);

}  // namespace qkd
