#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace copoly {

/// Validation failure for an omega charge string.
class SequenceError : public std::runtime_error {
public:
    enum class Kind { OddLength, NotCentered, Trivial };

    SequenceError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A centered periodic +-1 charge sequence, stored as one minimal period
/// of even length 2T.  Instances are immutable and safe to share.
///
/// Validity:
///   - length 2T, charges in {-1,+1}, sum over a period is zero;
///   - T is the minimal half-period;
///   - the sequence is not "alternating in pairs", i.e. there is at least
///     one k with charges[2k-2]*charges[2k-1] = +1 (this excludes T = 1).
class PeriodicSequence {
public:
    /// Parse a string of '+'/'-' characters (whitespace ignored), reduce it
    /// to its minimal period and validate.  Throws SequenceError.
    static PeriodicSequence parse(std::string_view tokens);

    /// T plus-charges followed by T minus-charges.  Requires T >= 2.
    static PeriodicSequence diblock(int T);

    /// The alternating pattern +-+-... with one "-+" -> "+-" swap per
    /// window of 2k sites; minimal half-period comes out as k.
    /// Requires k >= 2.
    static PeriodicSequence switched_alternating(int k);

    int period() const noexcept { return T_; }

    /// One minimal period, entries +-1, length 2*period().
    const std::vector<int>& charges() const noexcept { return charges_; }

    /// omega_x for x >= 1 under periodic extension.
    int charge_at(long long x) const {
        return charges_[static_cast<std::size_t>((x - 1) % (2 * T_))];
    }

    std::string render() const;

private:
    PeriodicSequence(std::vector<int> charges, int T)
        : charges_(std::move(charges)), T_(T) {}

    std::vector<int> charges_;
    int T_;
};

/// Excursion-charge matrix: xi[a][b] is the total charge collected by an
/// excursion whose endpoints fall in residue classes a and b mod T.  The
/// matrix has the difference structure xi[a][b] = offsets[b] - offsets[a],
/// where offsets[g] is the charge sum over the first 2g sites.
struct XiMatrix {
    int T = 0;
    std::vector<int> offsets;           // offsets[g], g = 0..T-1; offsets[0] = 0
    std::vector<std::vector<int>> xi;   // dense T x T copy
    int xi_star = 0;                    // max |xi[a][b]|, at most 2T

    int operator()(int a, int b) const { return offsets[b] - offsets[a]; }
};

XiMatrix xi_matrix(const PeriodicSequence& seq);

}  // namespace copoly
