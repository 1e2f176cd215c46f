#include "hiref/schedule.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "hiref/errors.hpp"

namespace hiref {

Index RankSchedule::lrot_calls() const {
    Index calls = 0, rho = 1;
    for (Index r : ranks) {
        calls += rho;
        rho *= r;
    }
    return calls;
}

Index RankSchedule::objective() const {
    Index obj = 0, rho = 1;
    for (Index r : ranks) {
        rho *= r;
        obj += rho;
    }
    return obj;
}

Index RankSchedule::leaf_solves() const {
    return effective.empty() ? 1 : effective.back();
}

RankSchedule make_schedule(std::vector<Index> ranks, Index base) {
    RankSchedule s;
    s.ranks = std::move(ranks);
    s.base = base;
    Index rho = 1;
    for (Index r : s.ranks) {
        rho *= r;
        s.effective.push_back(rho);
    }
    s.n_effective = rho * base;
    return s;
}

namespace {

std::vector<Index> divisors_of(Index n) {
    std::vector<Index> small, large;
    for (Index d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d != n / d) large.push_back(n / d);
        }
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;  // ascending
}

constexpr Index kInf = std::numeric_limits<Index>::max() / 4;

// Minimal sum of partial products over ordered factorizations of `value`
// into at most `len` factors, each in [2, r_max]. Memoized over the divisor
// lattice; obj(v) = min over divisors f: f * (1 + obj(v / f)).
struct FactorDp {
    Index r_max;
    std::map<std::pair<Index, Index>, Index> memo;

    Index best(Index value, Index len) {
        if (value == 1) return 0;
        if (len <= 0) return kInf;
        const auto key = std::make_pair(value, len);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        Index best_obj = kInf;
        for (Index f : divisors_of(value)) {
            if (f < 2) continue;
            if (f > r_max) break;
            const Index tail = best(value / f, len - 1);
            if (tail >= kInf) continue;
            best_obj = std::min(best_obj, f * (1 + tail));
        }
        memo[key] = best_obj;
        return best_obj;
    }

    // Lexicographically smallest optimal factor list (ascending head first).
    std::vector<Index> reconstruct(Index value, Index len) {
        std::vector<Index> out;
        while (value > 1) {
            const Index target = best(value, len);
            for (Index f : divisors_of(value)) {
                if (f < 2 || f > r_max) continue;
                const Index tail = best(value / f, len - 1);
                if (tail < kInf && f * (1 + tail) == target) {
                    out.push_back(f);
                    value /= f;
                    --len;
                    break;
                }
            }
        }
        return out;
    }
};

std::optional<RankSchedule> solve_for_n(Index n, Index depth, Index r_max, Index q_max) {
    FactorDp dp{r_max, {}};
    Index best_obj = kInf;
    Index best_q = 0;
    for (Index q : divisors_of(n)) {
        if (q > q_max) break;
        if (q == n) continue;  // at least one low-rank level
        const Index len = q > 1 ? depth - 1 : depth;
        if (len < 1) continue;
        const Index obj = dp.best(n / q, len);
        if (obj >= kInf) continue;
        // Ties prefer the larger base (cheaper leaves over an extra level).
        if (obj < best_obj || (obj == best_obj && q > best_q)) {
            best_obj = obj;
            best_q = q;
        }
    }
    if (best_obj >= kInf) return std::nullopt;
    const Index len = best_q > 1 ? depth - 1 : depth;
    return make_schedule(dp.reconstruct(n / best_q, len), best_q);
}

}  // namespace

ScheduleResult optimal_schedule(const ScheduleQuery& query) {
    if (query.n < 2) throw ScheduleError("n must be >= 2");
    if (query.depth < 1 || query.r_max < 1 || query.q_max < 1)
        throw ScheduleError("depth and caps must be >= 1");

    if (auto sched = solve_for_n(query.n, query.depth, query.r_max, query.q_max))
        return {*sched, 0};

    if (!query.trim) {
        std::string why = "no schedule for n=" + std::to_string(query.n) + " within ";
        why += "depth<=" + std::to_string(query.depth) +
               ", r_max<=" + std::to_string(query.r_max) +
               ", q_max<=" + std::to_string(query.q_max);
        throw ScheduleInfeasible(why);
    }
    for (Index np = query.n - 1; np >= 2; --np) {
        if (auto sched = solve_for_n(np, query.depth, query.r_max, query.q_max))
            return {*sched, query.n - np};
    }
    throw ScheduleInfeasible("no feasible schedule for any n' <= n");
}

bool validate_schedule(const std::vector<Index>& ranks, Index base, Index n,
                       std::string* diagnostics, std::optional<Index> r_max,
                       std::optional<Index> q_max) {
    auto fail = [&](const std::string& why) {
        if (diagnostics) *diagnostics = why;
        return false;
    };
    if (base < 1) return fail("base must be >= 1");
    if (ranks.empty()) return fail("rank list is empty");
    Index product = base;
    for (std::size_t t = 0; t < ranks.size(); ++t) {
        const Index r = ranks[t];
        if (r < 2) return fail("rank r_" + std::to_string(t + 1) + " below 2");
        if (r_max && r > *r_max)
            return fail("rank r_" + std::to_string(t + 1) + " exceeds cap");
        if (product > n / r) {
            Index shown = product;
            // saturate instead of overflowing for the message
            for (std::size_t s = t; s < ranks.size() && shown <= n; ++s) shown *= ranks[s];
            return fail("product " + std::to_string(shown) + " != n " + std::to_string(n));
        }
        product *= r;
    }
    if (q_max && base > *q_max) return fail("base exceeds cap");
    if (product != n)
        return fail("product " + std::to_string(product) + " != n " + std::to_string(n));
    if (diagnostics) diagnostics->clear();
    return true;
}

}  // namespace hiref
