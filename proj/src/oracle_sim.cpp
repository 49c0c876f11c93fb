#include "copoly/oracle_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "copoly/rng.hpp"

namespace copoly {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

double log_sum_exp(double a, double b) {
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// Sign of the bond (x-1, s) -> (x, s2): the sign of the nonzero endpoint.
inline int bond_sign(long long s, long long s2) {
    const long long ref = (s2 != 0) ? s2 : s;
    return ref > 0 ? +1 : -1;
}

void check_n(long long N, long long n_cap, const char* who) {
    if (N < 1) throw std::invalid_argument(std::string(who) + ": N must be >= 1");
    if (N > n_cap)
        throw std::invalid_argument(std::string(who) + ": N = " + std::to_string(N) +
                                    " exceeds the configured maximum " + std::to_string(n_cap));
}

void check_point(const PhasePoint& p, const char* who) {
    if (p.lambda < 0 || p.h < 0)
        throw std::domain_error(std::string(who) + ": lambda and h must be >= 0");
}

}  // namespace

double log_partition_exact(const PeriodicSequence& seq, const PhasePoint& p, long long N,
                           long long n_cap) {
    check_n(N, n_cap, "log_partition_exact");
    check_point(p, "log_partition_exact");
    const std::size_t width = static_cast<std::size_t>(2 * N + 1);
    std::vector<double> cur(width, 0.0), nxt(width, 0.0);
    cur[static_cast<std::size_t>(N)] = 1.0;
    double log_scale = 0.0;

    for (long long x = 1; x <= N; ++x) {
        const double a = p.lambda * (seq.charge_at(x) + p.h);
        const double wp = std::exp(a), wm = std::exp(-a);
        double row_max = 0.0;
        for (long long s = -x; s <= x; s += 2) {
            const double below = (s - 1 >= -(x - 1)) ? cur[static_cast<std::size_t>(N + s - 1)] : 0.0;
            const double above = (s + 1 <= x - 1) ? cur[static_cast<std::size_t>(N + s + 1)] : 0.0;
            double v;
            if (s > 0) v = 0.5 * wp * (below + above);
            else if (s < 0) v = 0.5 * wm * (below + above);
            else v = 0.5 * (wp * above + wm * below);
            nxt[static_cast<std::size_t>(N + s)] = v;
            row_max = std::max(row_max, v);
        }
        if (row_max > 1e250 || row_max < 1e-250) {
            for (long long s = -x; s <= x; s += 2) nxt[static_cast<std::size_t>(N + s)] /= row_max;
            log_scale += std::log(row_max);
        }
        cur.swap(nxt);
    }

    double total = 0.0;
    for (long long s = -N; s <= N; s += 2) total += cur[static_cast<std::size_t>(N + s)];
    return (std::log(total) + log_scale) / static_cast<double>(N);
}

FreeEnergyFit free_energy_estimate(const PeriodicSequence& seq, const PhasePoint& p,
                                   std::span<const long long> n_list, long long n_cap) {
    if (n_list.size() < 3)
        throw std::invalid_argument("free_energy_estimate: need at least three values of N");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("free_energy_estimate: N list must be increasing");

    std::vector<double> g(n_list.size()), y(n_list.size());
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const double n = static_cast<double>(n_list[i]);
        g[i] = std::log(n) / n;
        y[i] = log_partition_exact(seq, p, n_list[i], n_cap);
    }

    const double n = static_cast<double>(n_list.size());
    double sg = 0, sgg = 0, sy = 0, sgy = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        sg += g[i];
        sgg += g[i] * g[i];
        sy += y[i];
        sgy += g[i] * y[i];
    }
    const double det = n * sgg - sg * sg;
    FreeEnergyFit fit;
    fit.f_est = (sgg * sy - sg * sgy) / det;
    fit.slope = (n * sgy - sg * sy) / det;
    double ss = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = y[i] - fit.f_est - fit.slope * g[i];
        ss += r * r;
    }
    fit.err_est = std::sqrt(ss / n);
    return fit;
}

namespace {

// Backward log-partition rows:  B_x(s) = sum over continuations x+1..N.
// Row x is valid for |s| <= x, s = x (mod 2); row x is computed from row
// x+1, whose valid range |s'| <= x+1 covers every read.
class BackwardTable {
public:
    BackwardTable(const PeriodicSequence& seq, const PhasePoint& p, long long N)
        : seq_(seq), p_(p), N_(N), width_(static_cast<std::size_t>(2 * N + 1)) {
        block_ = std::clamp<long long>(static_cast<long long>(std::sqrt(static_cast<double>(N))),
                                       16, 512);
        buffer_.assign(static_cast<std::size_t>(block_ + 1), std::vector<double>(width_));
        // full backward sweep, saving rows at block boundaries
        std::vector<double> row(width_, 0.0), prev(width_);
        save(N, row);
        for (long long x = N - 1; x >= 0; --x) {
            prev.swap(row);
            fill_row(x, prev, row);
            if (x % block_ == 0) save(x, row);
        }
    }

    long long block() const noexcept { return block_; }

    // Load rows k*block+1 .. min((k+1)*block, N) into the working buffer.
    void load_block(long long k) {
        const long long lo = k * block_ + 1;
        const long long hi = std::min((k + 1) * block_, N_);
        buffer_hi_ = hi;
        std::vector<double>& top = buffer_[static_cast<std::size_t>(hi - lo + 1)];
        top = checkpoint(hi);
        for (long long x = hi - 1; x >= lo; --x)
            fill_row(x, buffer_[static_cast<std::size_t>(x - lo + 2)],
                     buffer_[static_cast<std::size_t>(x - lo + 1)]);
        buffer_lo_ = lo;
    }

    double log_b(long long x, long long s) const {
        return buffer_[static_cast<std::size_t>(x - buffer_lo_ + 1)]
                      [static_cast<std::size_t>(N_ + s)];
    }

    double bond_log_weight(long long x, long long s, long long s2) const {
        return p_.lambda * (seq_.charge_at(x) + p_.h) * bond_sign(s, s2);
    }

private:
    void fill_row(long long x, const std::vector<double>& next, std::vector<double>& out) const {
        for (long long s = -x; s <= x; s += 2) {
            const double up = bond_log_weight(x + 1, s, s + 1) + next[static_cast<std::size_t>(N_ + s + 1)];
            const double dn = bond_log_weight(x + 1, s, s - 1) + next[static_cast<std::size_t>(N_ + s - 1)];
            out[static_cast<std::size_t>(N_ + s)] = log_sum_exp(up, dn) - kLog2;
        }
    }

    void save(long long x, const std::vector<double>& row) { checkpoints_[x] = row; }
    const std::vector<double>& checkpoint(long long x) const { return checkpoints_.at(x); }

    const PeriodicSequence& seq_;
    PhasePoint p_;
    long long N_;
    std::size_t width_;
    long long block_ = 0;
    long long buffer_lo_ = 1, buffer_hi_ = 0;
    std::vector<std::vector<double>> buffer_;
    std::map<long long, std::vector<double>> checkpoints_;
};

}  // namespace

std::vector<PathSample> sample_paths(const PeriodicSequence& seq, const PhasePoint& p,
                                     long long N, int count, std::uint64_t seed,
                                     long long n_cap) {
    check_n(N, n_cap, "sample_paths");
    check_point(p, "sample_paths");
    if (count < 1) throw std::invalid_argument("sample_paths: count must be >= 1");

    BackwardTable table(seq, p, N);

    std::vector<PathSample> out(static_cast<std::size_t>(count));
    std::vector<Xoshiro256pp> rng;
    rng.reserve(static_cast<std::size_t>(count));
    std::vector<long long> state(static_cast<std::size_t>(count), 0);
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)].seed = seed;
        out[static_cast<std::size_t>(i)].stream = static_cast<std::uint64_t>(i);
        out[static_cast<std::size_t>(i)].heights.reserve(static_cast<std::size_t>(N + 1));
        out[static_cast<std::size_t>(i)].heights.push_back(0);
        rng.emplace_back(seed, static_cast<std::uint64_t>(i));
    }

    const long long blocks = (N + table.block() - 1) / table.block();
    for (long long k = 0; k < blocks; ++k) {
        table.load_block(k);
        const long long lo = k * table.block();
        const long long hi = std::min((k + 1) * table.block(), N);
        for (long long x = lo; x < hi; ++x) {
            for (int i = 0; i < count; ++i) {
                const long long s = state[static_cast<std::size_t>(i)];
                const double lup = table.bond_log_weight(x + 1, s, s + 1) + table.log_b(x + 1, s + 1);
                const double ldn = table.bond_log_weight(x + 1, s, s - 1) + table.log_b(x + 1, s - 1);
                const double p_up = 1.0 / (1.0 + std::exp(ldn - lup));
                const long long s2 = (rng[static_cast<std::size_t>(i)].uniform01() < p_up) ? s + 1 : s - 1;
                state[static_cast<std::size_t>(i)] = s2;
                out[static_cast<std::size_t>(i)].heights.push_back(static_cast<int>(s2));
            }
        }
    }
    return out;
}

std::vector<double> height_marginal(const PeriodicSequence& seq, const PhasePoint& p,
                                    long long N, long long x) {
    check_n(N, 30000, "height_marginal");
    if (x < 0 || x > N) throw std::invalid_argument("height_marginal: need 0 <= x <= N");
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const std::size_t width = static_cast<std::size_t>(2 * N + 1);

    auto lw = [&](long long step, long long s, long long s2) {
        return p.lambda * (seq.charge_at(step) + p.h) * bond_sign(s, s2);
    };

    // forward rows up to x
    std::vector<double> fwd(width, neg_inf), tmp(width, neg_inf);
    fwd[static_cast<std::size_t>(N)] = 0.0;
    for (long long step = 1; step <= x; ++step) {
        for (long long s = -step; s <= step; s += 2) {
            const double below = (std::llabs(s - 1) <= step - 1)
                                     ? fwd[static_cast<std::size_t>(N + s - 1)] + lw(step, s - 1, s)
                                     : neg_inf;
            const double above = (std::llabs(s + 1) <= step - 1)
                                     ? fwd[static_cast<std::size_t>(N + s + 1)] + lw(step, s + 1, s)
                                     : neg_inf;
            tmp[static_cast<std::size_t>(N + s)] = log_sum_exp(below, above) - kLog2;
        }
        fwd.swap(tmp);
    }

    // backward rows down to x
    std::vector<double> bwd(width, 0.0), tmp2(width);
    for (long long step = N - 1; step >= x; --step) {
        for (long long s = -step; s <= step; s += 2) {
            const double up = lw(step + 1, s, s + 1) + bwd[static_cast<std::size_t>(N + s + 1)];
            const double dn = lw(step + 1, s, s - 1) + bwd[static_cast<std::size_t>(N + s - 1)];
            tmp2[static_cast<std::size_t>(N + s)] = log_sum_exp(up, dn) - kLog2;
        }
        bwd.swap(tmp2);
    }

    std::vector<double> logp;
    logp.reserve(static_cast<std::size_t>(x + 1));
    double hi = neg_inf;
    for (long long s = -x; s <= x; s += 2) {
        const double lp = fwd[static_cast<std::size_t>(N + s)] + bwd[static_cast<std::size_t>(N + s)];
        logp.push_back(lp);
        hi = std::max(hi, lp);
    }
    double total = 0.0;
    std::vector<double> out(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) total += (out[i] = std::exp(logp[i] - hi));
    for (double& v : out) v /= total;
    return out;
}

EmpiricalStats excursion_stats(std::span<const PathSample> samples, int T,
                               std::span<const long long> levels) {
    if (samples.empty()) throw std::invalid_argument("excursion_stats: no samples");
    static const std::vector<long long> default_levels = {1, 2, 5, 10, 20, 50, 100};
    const std::span<const long long> lv =
        levels.empty() ? std::span<const long long>(default_levels) : levels;

    EmpiricalStats st;
    st.n_sites = static_cast<long long>(samples.front().heights.size()) - 1;
    st.n_paths = static_cast<long long>(samples.size());
    std::map<long long, long long> above;
    for (long long L : lv) above[L] = 0;

    long long total_len = 0;
    std::map<std::array<long long, 3>, long long> counts;
    for (const PathSample& path : samples) {
        const long long N = static_cast<long long>(path.heights.size()) - 1;
        long long prev_zero = 0, returns = 0;
        for (long long x = 2; x <= N; x += 2) {
            if (path.heights[static_cast<std::size_t>(x)] == 0) {
                const long long len = x - prev_zero;
                const long long alpha = (prev_zero / 2) % T;
                const long long beta = (x / 2) % T;
                st.excursion_lengths.push_back(len);
                total_len += len;
                ++counts[{alpha, beta, len}];
                ++returns;
                prev_zero = x;
            }
        }
        st.returns_per_path.push_back(returns);
        for (long long x = 1; x <= N; ++x) {
            const int s = path.heights[static_cast<std::size_t>(x)];
            for (auto& [L, c] : above)
                if (s > L) ++c;
        }
    }

    const long long n_exc = static_cast<long long>(st.excursion_lengths.size());
    st.mean_excursion = n_exc > 0 ? static_cast<double>(total_len) / static_cast<double>(n_exc) : 0.0;
    st.returns_per_site =
        static_cast<double>(n_exc) / static_cast<double>(st.n_sites * st.n_paths);
    for (auto& [L, c] : above)
        st.frac_above[L] =
            static_cast<double>(c) / static_cast<double>(st.n_sites * st.n_paths);
    for (auto& [key, c] : counts)
        st.empirical[key] = static_cast<double>(c) / static_cast<double>(n_exc);
    return st;
}

double tail_decay_rate(std::span<const PathSample> samples) {
    if (samples.empty()) throw std::invalid_argument("tail_decay_rate: no samples");
    std::vector<long long> hist;
    for (const PathSample& path : samples) {
        const long long N = static_cast<long long>(path.heights.size()) - 1;
        for (long long x = N / 4; x <= 3 * N / 4; ++x) {
            const long long v = std::llabs(path.heights[static_cast<std::size_t>(x)]);
            if (static_cast<std::size_t>(v) >= hist.size())
                hist.resize(static_cast<std::size_t>(v) + 1, 0);
            ++hist[static_cast<std::size_t>(v)];
        }
    }
    // log-linear fit over the contiguous well-populated range starting at 1
    std::vector<double> vs, ls;
    for (std::size_t v = 1; v < hist.size() && hist[v] >= 20; ++v) {
        vs.push_back(static_cast<double>(v));
        ls.push_back(std::log(static_cast<double>(hist[v])));
    }
    if (vs.size() < 2) return 0.0;
    const double n = static_cast<double>(vs.size());
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        sx += vs[i];
        sxx += vs[i] * vs[i];
        sy += ls[i];
        sxy += vs[i] * ls[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::max(0.0, -slope);
}

}  // namespace copoly
