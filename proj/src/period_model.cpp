#include "copoly/period_model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>

namespace copoly {

namespace {

// Smallest even d dividing n such that v is d-periodic.
std::size_t minimal_even_period(const std::vector<int>& v) {
    const std::size_t n = v.size();
    for (std::size_t d = 2; d < n; d += 2) {
        if (n % d != 0) continue;
        bool periodic = true;
        for (std::size_t i = d; i < n && periodic; ++i)
            periodic = (v[i] == v[i - d]);
        if (periodic) return d;
    }
    return n;
}

bool alternating_in_pairs(const std::vector<int>& v) {
    for (std::size_t k = 0; k + 1 < v.size(); k += 2)
        if (v[k] * v[k + 1] != -1) return false;
    return true;
}

}  // namespace

PeriodicSequence PeriodicSequence::parse(std::string_view tokens) {
    std::vector<int> v;
    v.reserve(tokens.size());
    for (char c : tokens) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '+') v.push_back(+1);
        else if (c == '-') v.push_back(-1);
        else throw std::invalid_argument(std::string("invalid character '") + c +
                                         "' in charge sequence (expected '+' or '-')");
    }
    if (v.empty() || v.size() % 2 != 0)
        throw SequenceError(SequenceError::Kind::OddLength,
                            "charge sequence must have even positive length, got " +
                                std::to_string(v.size()));

    v.resize(minimal_even_period(v));

    if (std::accumulate(v.begin(), v.end(), 0) != 0)
        throw SequenceError(SequenceError::Kind::NotCentered,
                            "charge sequence is not centered: period sum is nonzero");

    if (alternating_in_pairs(v))
        throw SequenceError(SequenceError::Kind::Trivial,
                            "trivial charge sequence: every pair (2k-1,2k) is mixed");

    const int T = static_cast<int>(v.size() / 2);
    return PeriodicSequence(std::move(v), T);
}

PeriodicSequence PeriodicSequence::diblock(int T) {
    if (T < 2) throw std::invalid_argument("diblock: T must be >= 2");
    std::vector<int> v(static_cast<std::size_t>(2 * T));
    std::fill(v.begin(), v.begin() + T, +1);
    std::fill(v.begin() + T, v.end(), -1);
    return PeriodicSequence(std::move(v), T);
}

PeriodicSequence PeriodicSequence::switched_alternating(int k) {
    if (k < 2) throw std::invalid_argument("switched_alternating: k must be >= 2");
    std::string s(static_cast<std::size_t>(2 * k), '+');
    for (std::size_t i = 1; i < s.size(); i += 2) s[i] = '-';
    // One "-+" -> "+-" swap per period, at sites 2 and 3 (1-based).
    std::swap(s[1], s[2]);
    return parse(s);
}

std::string PeriodicSequence::render() const {
    std::string s;
    s.reserve(charges_.size());
    for (int c : charges_) s.push_back(c > 0 ? '+' : '-');
    return s;
}

XiMatrix xi_matrix(const PeriodicSequence& seq) {
    const int T = seq.period();
    XiMatrix m;
    m.T = T;
    m.offsets.assign(static_cast<std::size_t>(T), 0);
    int run = 0;
    for (int g = 1; g < T; ++g) {
        run += seq.charge_at(2 * g - 1) + seq.charge_at(2 * g);
        m.offsets[static_cast<std::size_t>(g)] = run;
    }
    m.xi.assign(static_cast<std::size_t>(T), std::vector<int>(static_cast<std::size_t>(T), 0));
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) {
            const int val = m.offsets[static_cast<std::size_t>(b)] -
                            m.offsets[static_cast<std::size_t>(a)];
            m.xi[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = val;
            m.xi_star = std::max(m.xi_star, std::abs(val));
        }
    // a nontrivial centered sequence always has some aligned non-mixed pair
    if (m.xi_star == 0) throw std::logic_error("xi_matrix: identically zero charge matrix");
    return m;
}

}  // namespace copoly
