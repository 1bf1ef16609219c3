#include "bbo/nflt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bbo/error.hpp"
#include "bbo/rng.hpp"

namespace bbo::nflt {

namespace {

std::vector<bool> visited_mask(std::span<const Query> observed, std::size_t m) {
    std::vector<bool> seen(m, false);
    for (const Query& q : observed) {
        if (q.x < m) {
            seen[q.x] = true;
        }
    }
    return seen;
}

/// First unvisited entry of a fixed visiting order.
std::size_t first_unvisited(std::span<const std::size_t> order, std::span<const Query> observed,
                            std::size_t m) {
    const std::vector<bool> seen = visited_mask(observed, m);
    for (std::size_t x : order) {
        if (!seen[x]) {
            return x;
        }
    }
    fail(ErrorCode::InvalidArgument, "every index has already been queried");
}

std::uint64_t checked_power(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && result > cap / base) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        result *= base;
    }
    return result;
}

void check_shape(std::size_t m, std::size_t r) {
    if (m == 0 || r == 0) {
        fail(ErrorCode::InvalidArgument, "m and r must be positive");
    }
    if (r > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
        fail(ErrorCode::InvalidArgument, "r is too large");
    }
}

} // namespace

void FiniteProblem::validate() const {
    if (values.size() != m) {
        fail(ErrorCode::InvalidArgument, "value vector length differs from m");
    }
    for (int v : values) {
        if (v < 0 || static_cast<std::size_t>(v) >= r) {
            fail(ErrorCode::InvalidArgument, "value index outside [0, r)");
        }
    }
}

int FiniteProblem::max_value() const { return *std::max_element(values.begin(), values.end()); }

std::size_t LexicographicPolicy::next(std::span<const Query> observed, std::size_t m) const {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return first_unvisited(order, observed, m);
}

std::size_t ReversePolicy::next(std::span<const Query> observed, std::size_t m) const {
    std::vector<std::size_t> order(m);
    std::iota(order.rbegin(), order.rend(), std::size_t{0});
    return first_unvisited(order, observed, m);
}

std::size_t MiddleOutPolicy::next(std::span<const Query> observed, std::size_t m) const {
    std::vector<std::size_t> order;
    order.reserve(m);
    const auto mid = static_cast<std::ptrdiff_t>(m / 2);
    order.push_back(static_cast<std::size_t>(mid));
    for (std::ptrdiff_t off = 1; order.size() < m; ++off) {
        if (mid + off < static_cast<std::ptrdiff_t>(m)) {
            order.push_back(static_cast<std::size_t>(mid + off));
        }
        if (mid - off >= 0) {
            order.push_back(static_cast<std::size_t>(mid - off));
        }
    }
    return first_unvisited(order, observed, m);
}

std::string ShuffledPolicy::name() const { return "shuffle(" + std::to_string(seed_) + ")"; }

std::size_t ShuffledPolicy::next(std::span<const Query> observed, std::size_t m) const {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng(seed_);
    for (std::size_t i = m; i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    return first_unvisited(order, observed, m);
}

std::size_t GreedyNeighborPolicy::next(std::span<const Query> observed, std::size_t m) const {
    if (observed.empty()) {
        return 0;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < observed.size(); ++i) {
        if (observed[i].y > observed[best].y) {
            best = i;
        }
    }
    const std::size_t anchor = observed[best].x;
    const std::vector<bool> seen = visited_mask(observed, m);
    std::optional<std::size_t> choice;
    std::size_t choice_dist = 0;
    for (std::size_t x = 0; x < m; ++x) {
        if (seen[x]) {
            continue;
        }
        const std::size_t dist = x > anchor ? x - anchor : anchor - x;
        if (!choice || dist <= choice_dist) {
            choice = x;
            choice_dist = dist;
        }
    }
    if (!choice) {
        fail(ErrorCode::InvalidArgument, "every index has already been queried");
    }
    return *choice;
}

std::unique_ptr<SearchPolicy> make_policy(std::string_view name, std::uint64_t shuffle_seed) {
    if (name == "lexicographic" || name == "bottom-first") {
        return std::make_unique<LexicographicPolicy>();
    }
    if (name == "reverse" || name == "top-first") {
        return std::make_unique<ReversePolicy>();
    }
    if (name == "middle-out") {
        return std::make_unique<MiddleOutPolicy>();
    }
    if (name == "shuffle" || name == "seeded-shuffle") {
        return std::make_unique<ShuffledPolicy>(shuffle_seed);
    }
    if (name == "hill-climb") {
        return std::make_unique<GreedyNeighborPolicy>();
    }
    fail(ErrorCode::InvalidArgument, "unknown search policy '" + std::string(name) + "'");
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i stays integral at every step.
        const std::uint64_t num = n - k + i;
        const std::uint64_t g = std::gcd(result, i);
        const std::uint64_t reduced = result / g;
        const std::uint64_t denom = i / g;
        if (reduced > std::numeric_limits<std::uint64_t>::max() / num) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        result = reduced * num / denom;
    }
    return result;
}

FullClass::FullClass(std::size_t m, std::size_t r, std::uint64_t cap) : m_(m), r_(r), size_(0) {
    check_shape(m, r);
    size_ = checked_power(r, m, cap);
    if (size_ > cap) {
        fail(ErrorCode::ClassTooLarge, std::to_string(r) + "^" + std::to_string(m) +
                                           " functions exceed the cap of " + std::to_string(cap));
    }
}

std::string FullClass::description() const {
    return "full Y^X (m=" + std::to_string(m_) + ", r=" + std::to_string(r_) + ")";
}

void FullClass::for_each(const std::function<void(const FiniteProblem&)>& visit) const {
    FiniteProblem f{m_, r_, std::vector<int>(m_, 0)};
    const int top = static_cast<int>(r_) - 1;
    for (;;) {
        visit(f);
        // Odometer increment, last index fastest (lexicographic order).
        std::size_t i = m_;
        while (i > 0 && f.values[i - 1] == top) {
            f.values[i - 1] = 0;
            --i;
        }
        if (i == 0) {
            return;
        }
        ++f.values[i - 1];
    }
}

MonotoneClass::MonotoneClass(std::size_t m, std::size_t r, std::uint64_t cap)
    : m_(m), r_(r), size_(0) {
    check_shape(m, r);
    size_ = binomial(m + r - 1, m);
    if (size_ > cap) {
        fail(ErrorCode::ClassTooLarge, "C(" + std::to_string(m + r - 1) + ", " + std::to_string(m) +
                                           ") monotone functions exceed the cap of " +
                                           std::to_string(cap));
    }
}

std::string MonotoneClass::description() const {
    return "monotone nondecreasing (m=" + std::to_string(m_) + ", r=" + std::to_string(r_) + ")";
}

void MonotoneClass::for_each(const std::function<void(const FiniteProblem&)>& visit) const {
    FiniteProblem f{m_, r_, std::vector<int>(m_, 0)};
    const int top = static_cast<int>(r_) - 1;
    for (;;) {
        visit(f);
        // Next nondecreasing sequence: bump the last non-maximal entry and
        // copy its new value to everything after it.
        std::size_t i = m_;
        while (i > 0 && f.values[i - 1] == top) {
            --i;
        }
        if (i == 0) {
            return;
        }
        const int v = f.values[i - 1] + 1;
        std::fill(f.values.begin() + static_cast<std::ptrdiff_t>(i - 1), f.values.end(), v);
    }
}

ExplicitClass::ExplicitClass(std::string description, std::vector<FiniteProblem> functions)
    : description_(std::move(description)), functions_(std::move(functions)) {
    if (functions_.empty()) {
        fail(ErrorCode::InvalidArgument, "function class must be nonempty");
    }
    for (const auto& f : functions_) {
        f.validate();
        if (f.m != functions_.front().m || f.r != functions_.front().r) {
            fail(ErrorCode::InvalidArgument, "functions in a class must share m and r");
        }
    }
}

void ExplicitClass::for_each(const std::function<void(const FiniteProblem&)>& visit) const {
    for (const auto& f : functions_) {
        visit(f);
    }
}

FullClass enumerate_functions(std::size_t m, std::size_t r, std::uint64_t cap) {
    return FullClass(m, r, cap);
}

MonotoneClass enumerate_monotone(std::size_t m, std::size_t r, std::uint64_t cap) {
    return MonotoneClass(m, r, cap);
}

Trace run_trace(const SearchPolicy& policy, const FiniteProblem& f, std::size_t k) {
    if (k == 0 || k > f.m) {
        fail(ErrorCode::InvalidArgument, "k must lie in [1, m]");
    }
    std::vector<Query> observed;
    observed.reserve(k);
    std::vector<bool> seen(f.m, false);
    Trace trace;
    trace.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t x = policy.next(observed, f.m);
        if (x >= f.m) {
            fail(ErrorCode::InvalidArgument,
                 policy.name() + " returned index " + std::to_string(x) + " outside X");
        }
        if (seen[x]) {
            fail(ErrorCode::RevisitDetected,
                 policy.name() + " revisited index " + std::to_string(x));
        }
        seen[x] = true;
        const int y = f.values[x];
        observed.push_back(Query{x, y});
        trace.push_back(y);
    }
    return trace;
}

std::uint64_t TraceHistogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [trace, count] : counts) {
        t += count;
    }
    return t;
}

void TraceHistogram::merge(const TraceHistogram& other) {
    for (const auto& [trace, count] : other.counts) {
        counts[trace] += count;
    }
}

TraceHistogram TraceHistogram::prefix(std::size_t j) const {
    TraceHistogram out;
    for (const auto& [trace, count] : counts) {
        const std::size_t len = std::min(j, trace.size());
        out.counts[Trace(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(len))] += count;
    }
    return out;
}

std::map<int, std::uint64_t> TraceHistogram::value_at(std::size_t j) const {
    std::map<int, std::uint64_t> out;
    for (const auto& [trace, count] : counts) {
        if (j >= 1 && j <= trace.size()) {
            out[trace[j - 1]] += count;
        }
    }
    return out;
}

std::map<int, std::uint64_t> TraceHistogram::best_by(std::size_t j) const {
    std::map<int, std::uint64_t> out;
    for (const auto& [trace, count] : counts) {
        if (j >= 1 && j <= trace.size()) {
            out[*std::max_element(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(j))] +=
                count;
        }
    }
    return out;
}

TraceHistogram performance_histogram(const SearchPolicy& policy, std::size_t k,
                                     const FunctionClass& functions) {
    if (functions.size() == 0) {
        fail(ErrorCode::InvalidArgument, "function class is empty");
    }
    TraceHistogram h;
    functions.for_each([&](const FiniteProblem& f) { ++h.counts[run_trace(policy, f, k)]; });
    return h;
}

NfltReport compare_histograms(std::span<const SearchPolicy* const> policies,
                              const FunctionClass& functions, std::size_t k) {
    if (policies.empty()) {
        fail(ErrorCode::InvalidArgument, "at least one policy is required");
    }
    NfltReport report;
    report.class_description = functions.description();
    report.class_size = functions.size();
    report.m = functions.m();
    report.r = functions.r();
    report.k = k;
    for (const SearchPolicy* p : policies) {
        report.policies.push_back(p->name());
        report.histograms.push_back(performance_histogram(*p, k, functions));
    }

    report.equal = true;
    report.derived_equal = true;
    for (std::size_t j = 1; j <= k && report.equal; ++j) {
        const TraceHistogram base = report.histograms.front().prefix(j);
        for (std::size_t p = 1; p < policies.size(); ++p) {
            const TraceHistogram other = report.histograms[p].prefix(j);
            if (other == base) {
                continue;
            }
            report.equal = false;
            // First trace (in key order) whose count differs.
            std::map<Trace, bool> keys;
            for (const auto& [t, c] : base.counts) keys[t] = true;
            for (const auto& [t, c] : other.counts) keys[t] = true;
            for (const auto& [t, unused] : keys) {
                const auto a = base.counts.find(t);
                const auto b = other.counts.find(t);
                const std::uint64_t ca = a == base.counts.end() ? 0 : a->second;
                const std::uint64_t cb = b == other.counts.end() ? 0 : b->second;
                if (ca != cb) {
                    Counterexample ce;
                    ce.step = j;
                    ce.trace = t;
                    for (const auto& h : report.histograms) {
                        const TraceHistogram ph = h.prefix(j);
                        const auto it = ph.counts.find(t);
                        ce.counts.push_back(it == ph.counts.end() ? 0 : it->second);
                    }
                    report.counterexample = std::move(ce);
                    break;
                }
            }
            break;
        }
    }
    for (std::size_t j = 1; j <= k; ++j) {
        for (std::size_t p = 1; p < policies.size(); ++p) {
            if (report.histograms[p].value_at(j) != report.histograms.front().value_at(j) ||
                report.histograms[p].best_by(j) != report.histograms.front().best_by(j)) {
                report.derived_equal = false;
            }
        }
    }
    return report;
}

NfltReport verify_nflt(std::span<const SearchPolicy* const> policies, std::size_t m,
                       std::size_t r, std::size_t k, std::uint64_t cap) {
    if (policies.size() < 2) {
        fail(ErrorCode::InvalidArgument, "verification compares at least two policies");
    }
    const FullClass full(m, r, cap);
    return compare_histograms(policies, full, k);
}

double SuccessTable::fraction(std::size_t policy, std::size_t step) const {
    return static_cast<double>(successes.at(policy).at(step - 1)) / static_cast<double>(class_size);
}

SuccessTable compare_on_class(std::span<const SearchPolicy* const> policies,
                              const FunctionClass& functions, std::size_t k) {
    if (policies.empty()) {
        fail(ErrorCode::InvalidArgument, "at least one policy is required");
    }
    SuccessTable table;
    table.class_size = functions.size();
    table.k = k;
    table.successes.assign(policies.size(), std::vector<std::uint64_t>(k, 0));
    for (const SearchPolicy* p : policies) {
        table.policies.push_back(p->name());
    }
    functions.for_each([&](const FiniteProblem& f) {
        const int target = f.max_value();
        for (std::size_t p = 0; p < policies.size(); ++p) {
            const Trace trace = run_trace(*policies[p], f, k);
            const auto hit = std::find(trace.begin(), trace.end(), target);
            const auto first = static_cast<std::size_t>(hit - trace.begin());
            for (std::size_t j = first; j < k; ++j) {
                ++table.successes[p][j];
            }
        }
    });
    return table;
}

} // namespace bbo::nflt
