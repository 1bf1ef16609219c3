#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// Exhaustive No-Free-Lunch experiments on finite spaces X = {0..m-1},
/// Y = {0..r-1}.
///
/// "Algorithm" here means a deterministic, non-revisiting search policy. A
/// stochastic algorithm becomes one by fixing its seed, which is how the
/// shuffled policy is built. The primary performance record is the full
/// histogram of y-traces over a function class; the value-at-step-j and
/// best-by-step-j distributions are both derived from it.
namespace bbo::nflt {

inline constexpr std::uint64_t kDefaultClassCap = 10'000'000;

/// f: X -> Y stored as value indices.
struct FiniteProblem {
    std::size_t m = 0;
    std::size_t r = 0;
    std::vector<int> values;

    /// Throws InvalidArgument unless values.size() == m and every value is in [0, r).
    void validate() const;
    [[nodiscard]] int max_value() const;

    friend bool operator==(const FiniteProblem&, const FiniteProblem&) = default;
};

struct Query {
    std::size_t x = 0;
    int y = 0;
};

/// Sequence of observed value indices.
using Trace = std::vector<int>;

class SearchPolicy {
public:
    virtual ~SearchPolicy() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    /// Next x-index given the queries so far. Must not repeat an observed index.
    [[nodiscard]] virtual std::size_t next(std::span<const Query> observed, std::size_t m) const = 0;
};

/// 0, 1, 2, ... ("bottom-first").
class LexicographicPolicy final : public SearchPolicy {
public:
    [[nodiscard]] std::string name() const override { return "lexicographic"; }
    [[nodiscard]] std::size_t next(std::span<const Query> observed, std::size_t m) const override;
};

/// m-1, m-2, ... ("top-first").
class ReversePolicy final : public SearchPolicy {
public:
    [[nodiscard]] std::string name() const override { return "reverse"; }
    [[nodiscard]] std::size_t next(std::span<const Query> observed, std::size_t m) const override;
};

/// m/2, then alternately above and below.
class MiddleOutPolicy final : public SearchPolicy {
public:
    [[nodiscard]] std::string name() const override { return "middle-out"; }
    [[nodiscard]] std::size_t next(std::span<const Query> observed, std::size_t m) const override;
};

/// A fixed permutation of X drawn from RngStream(seed).
class ShuffledPolicy final : public SearchPolicy {
public:
    explicit ShuffledPolicy(std::uint64_t seed) : seed_(seed) {}
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::size_t next(std::span<const Query> observed, std::size_t m) const override;

private:
    std::uint64_t seed_;
};

/// Adaptive: starts at 0, then queries the unvisited index nearest to the best
/// value seen so far (earliest best on ties, higher index on distance ties).
class GreedyNeighborPolicy final : public SearchPolicy {
public:
    [[nodiscard]] std::string name() const override { return "hill-climb"; }
    [[nodiscard]] std::size_t next(std::span<const Query> observed, std::size_t m) const override;
};

/// Wraps any callable as a policy.
class CallablePolicy final : public SearchPolicy {
public:
    using Fn = std::function<std::size_t(std::span<const Query>, std::size_t)>;
    CallablePolicy(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] std::size_t next(std::span<const Query> observed, std::size_t m) const override {
        return fn_(observed, m);
    }

private:
    std::string name_;
    Fn fn_;
};

/// Built-in policy by name: lexicographic (bottom-first), reverse (top-first),
/// middle-out, shuffle, hill-climb. Throws InvalidArgument for anything else.
std::unique_ptr<SearchPolicy> make_policy(std::string_view name, std::uint64_t shuffle_seed = 0);

/// A streamed set of functions sharing (m, r).
class FunctionClass {
public:
    virtual ~FunctionClass() = default;
    [[nodiscard]] virtual std::string description() const = 0;
    [[nodiscard]] virtual std::size_t m() const = 0;
    [[nodiscard]] virtual std::size_t r() const = 0;
    [[nodiscard]] virtual std::uint64_t size() const = 0;
    virtual void for_each(const std::function<void(const FiniteProblem&)>& visit) const = 0;
};

/// All r^m functions in lexicographic order. Throws ClassTooLarge when r^m > cap.
class FullClass final : public FunctionClass {
public:
    FullClass(std::size_t m, std::size_t r, std::uint64_t cap = kDefaultClassCap);
    [[nodiscard]] std::string description() const override;
    [[nodiscard]] std::size_t m() const override { return m_; }
    [[nodiscard]] std::size_t r() const override { return r_; }
    [[nodiscard]] std::uint64_t size() const override { return size_; }
    void for_each(const std::function<void(const FiniteProblem&)>& visit) const override;

private:
    std::size_t m_;
    std::size_t r_;
    std::uint64_t size_;
};

/// All nondecreasing functions, C(m + r - 1, m) of them, in lexicographic order.
class MonotoneClass final : public FunctionClass {
public:
    MonotoneClass(std::size_t m, std::size_t r, std::uint64_t cap = kDefaultClassCap);
    [[nodiscard]] std::string description() const override;
    [[nodiscard]] std::size_t m() const override { return m_; }
    [[nodiscard]] std::size_t r() const override { return r_; }
    [[nodiscard]] std::uint64_t size() const override { return size_; }
    void for_each(const std::function<void(const FiniteProblem&)>& visit) const override;

private:
    std::size_t m_;
    std::size_t r_;
    std::uint64_t size_;
};

/// An explicit list, for hand-built restricted classes.
class ExplicitClass final : public FunctionClass {
public:
    ExplicitClass(std::string description, std::vector<FiniteProblem> functions);
    [[nodiscard]] std::string description() const override { return description_; }
    [[nodiscard]] std::size_t m() const override { return functions_.front().m; }
    [[nodiscard]] std::size_t r() const override { return functions_.front().r; }
    [[nodiscard]] std::uint64_t size() const override { return functions_.size(); }
    void for_each(const std::function<void(const FiniteProblem&)>& visit) const override;

private:
    std::string description_;
    std::vector<FiniteProblem> functions_;
};

FullClass enumerate_functions(std::size_t m, std::size_t r, std::uint64_t cap = kDefaultClassCap);
MonotoneClass enumerate_monotone(std::size_t m, std::size_t r,
                                 std::uint64_t cap = kDefaultClassCap);

/// Binomial coefficient with overflow saturating to UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Value trace of `policy` on f for k steps. Throws RevisitDetected when the
/// policy repeats an index and InvalidArgument for k outside [1, m].
Trace run_trace(const SearchPolicy& policy, const FiniteProblem& f, std::size_t k);

/// Counts of y-traces over a function class. Merging is associative and
/// commutative, so partitioned enumeration gives the same result.
struct TraceHistogram {
    std::map<Trace, std::uint64_t> counts;

    [[nodiscard]] std::uint64_t total() const;
    void merge(const TraceHistogram& other);
    /// Histogram of the first j entries of every trace.
    [[nodiscard]] TraceHistogram prefix(std::size_t j) const;
    /// Distribution of the value found at step j (1-based).
    [[nodiscard]] std::map<int, std::uint64_t> value_at(std::size_t j) const;
    /// Distribution of the best value found by step j (1-based).
    [[nodiscard]] std::map<int, std::uint64_t> best_by(std::size_t j) const;

    friend bool operator==(const TraceHistogram&, const TraceHistogram&) = default;
};

TraceHistogram performance_histogram(const SearchPolicy& policy, std::size_t k,
                                     const FunctionClass& functions);

struct Counterexample {
    /// First step (1-based) at which the prefix histograms differ.
    std::size_t step = 0;
    Trace trace;
    /// Count of `trace` for each policy, in input order.
    std::vector<std::uint64_t> counts;
};

struct NfltReport {
    std::string class_description;
    std::uint64_t class_size = 0;
    std::size_t m = 0;
    std::size_t r = 0;
    std::size_t k = 0;
    std::vector<std::string> policies;
    /// Full k-step histogram per policy.
    std::vector<TraceHistogram> histograms;
    bool equal = false;
    /// Whether the value-at-step and best-by-step distributions also agree at
    /// every step (implied by `equal`, checked separately).
    bool derived_equal = false;
    std::optional<Counterexample> counterexample;
};

/// Compares policies' trace histograms at every step 1..k over `functions`.
NfltReport compare_histograms(std::span<const SearchPolicy* const> policies,
                              const FunctionClass& functions, std::size_t k);

/// compare_histograms over the full class Y^X. Needs at least two policies.
NfltReport verify_nflt(std::span<const SearchPolicy* const> policies, std::size_t m,
                       std::size_t r, std::size_t k, std::uint64_t cap = kDefaultClassCap);

/// successes[p][j - 1]: functions in the class whose maximum value policy p
/// observed within j steps.
struct SuccessTable {
    std::vector<std::string> policies;
    std::uint64_t class_size = 0;
    std::size_t k = 0;
    std::vector<std::vector<std::uint64_t>> successes;

    [[nodiscard]] double fraction(std::size_t policy, std::size_t step) const;
};

SuccessTable compare_on_class(std::span<const SearchPolicy* const> policies,
                              const FunctionClass& functions, std::size_t k);

} // namespace bbo::nflt
