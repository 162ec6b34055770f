#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include "vqls/errors.hpp"

namespace vqls {

using Complex = std::complex<double>;
using BasisIndex = std::uint64_t;

/// Bit of the basis-state index that carries qubit `q` in an `n`-qubit
/// register. Qubit 0 is the most significant bit.
[[nodiscard]] constexpr BasisIndex qubit_bit(std::size_t q, std::size_t n) noexcept {
    return BasisIndex{1} << (n - 1 - q);
}

/**
 * A tensor product of single-qubit operators from {I, X, Y, Z}, one letter
 * per qubit. Letter 0 acts on qubit 0 (the leftmost Kronecker factor).
 *
 * Internally the string is also kept as a pair of bit masks over basis
 * indices: `flip_mask` marks qubits carrying X or Y (the operator maps
 * |i> to |i ^ flip_mask>) and `phase_mask` marks qubits carrying Y or Z
 * (each contributes a sign (-1)^bit). Every Y adds a factor i.
 */
class PauliString {
  public:
    PauliString() = default;

    explicit PauliString(std::string_view letters) : letters_(letters) {
        if (letters_.empty()) {
            throw SizeError("Pauli string must act on at least one qubit");
        }
        const std::size_t n = letters_.size();
        for (std::size_t q = 0; q < n; ++q) {
            const BasisIndex bit = qubit_bit(q, n);
            switch (letters_[q]) {
            case 'I':
                break;
            case 'X':
                flip_mask_ |= bit;
                break;
            case 'Y':
                flip_mask_ |= bit;
                phase_mask_ |= bit;
                ++y_count_;
                break;
            case 'Z':
                phase_mask_ |= bit;
                break;
            default:
                throw ArgumentError("invalid Pauli letter '" +
                                    std::string(1, letters_[q]) + "' in \"" +
                                    letters_ + "\"");
            }
        }
    }

    [[nodiscard]] static PauliString identity(std::size_t n) {
        return PauliString(std::string(n, 'I'));
    }

    /// Single-letter string `letter` on qubit `q`, identity elsewhere.
    [[nodiscard]] static PauliString single(std::size_t n, std::size_t q, char letter) {
        if (q >= n) {
            throw IndexError("qubit " + std::to_string(q) + " out of range for " +
                             std::to_string(n) + " qubits");
        }
        std::string s(n, 'I');
        s[q] = letter;
        return PauliString(s);
    }

    /// Builds the string from its masks; used when enumerating all 4^n strings.
    [[nodiscard]] static PauliString from_masks(std::size_t n, BasisIndex flip,
                                                BasisIndex phase) {
        std::string s(n, 'I');
        for (std::size_t q = 0; q < n; ++q) {
            const BasisIndex bit = qubit_bit(q, n);
            const bool x = (flip & bit) != 0;
            const bool z = (phase & bit) != 0;
            s[q] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
        }
        return PauliString(s);
    }

    [[nodiscard]] std::size_t size() const noexcept { return letters_.size(); }
    [[nodiscard]] const std::string &str() const noexcept { return letters_; }
    [[nodiscard]] char operator[](std::size_t q) const {
        if (q >= letters_.size()) {
            throw IndexError("qubit " + std::to_string(q) + " out of range for a " +
                             std::to_string(letters_.size()) + "-qubit string");
        }
        return letters_[q];
    }

    [[nodiscard]] BasisIndex flip_mask() const noexcept { return flip_mask_; }
    [[nodiscard]] BasisIndex phase_mask() const noexcept { return phase_mask_; }
    [[nodiscard]] unsigned y_count() const noexcept { return y_count_; }
    [[nodiscard]] bool is_identity() const noexcept {
        return flip_mask_ == 0 && phase_mask_ == 0;
    }

    /// Phase picked up by basis state |i>: P|i> = phase(i) |i ^ flip_mask>.
    [[nodiscard]] Complex phase_on(BasisIndex i) const noexcept {
        static constexpr Complex kIPowers[4] = {
            {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        const Complex base = kIPowers[y_count_ % 4];
        return (std::popcount(i & phase_mask_) % 2 == 0) ? base : -base;
    }

    friend bool operator==(const PauliString &a, const PauliString &b) {
        return a.letters_ == b.letters_;
    }
    friend auto operator<=>(const PauliString &a, const PauliString &b) {
        return a.letters_ <=> b.letters_;
    }

  private:
    std::string letters_;
    BasisIndex flip_mask_ = 0;
    BasisIndex phase_mask_ = 0;
    unsigned y_count_ = 0;
};

} // namespace vqls
