#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "bbo/error.hpp"
#include "bbo/nflt.hpp"
#include "bbo/rng.hpp"

using namespace bbo;
using namespace bbo::nflt;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no bbo::Error thrown";
    return ErrorCode::InternalConsistency;
}

std::vector<FiniteProblem> collect(const FunctionClass& cls) {
    std::vector<FiniteProblem> out;
    cls.for_each([&](const FiniteProblem& f) { out.push_back(f); });
    return out;
}

std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
    std::uint64_t v = 1;
    while (e-- > 0) {
        v *= b;
    }
    return v;
}

/// Brute-force listing of Y^X by odometer, last index fastest.
std::vector<std::vector<int>> brute_force_all(std::size_t m, std::size_t r) {
    std::vector<std::vector<int>> out;
    std::vector<int> v(m, 0);
    while (true) {
        out.push_back(v);
        std::size_t i = m;
        while (i > 0) {
            --i;
            if (++v[i] < static_cast<int>(r)) {
                break;
            }
            v[i] = 0;
            if (i == 0) {
                return out;
            }
        }
    }
}

/// Adaptive policy driven by a hash of everything observed so far.
CallablePolicy hashed_policy(std::uint64_t salt) {
    return CallablePolicy("hashed-" + std::to_string(salt), [salt](std::span<const Query> obs, std::size_t m) {
        std::uint64_t h = salt;
        std::vector<bool> seen(m, false);
        for (const Query& q : obs) {
            seen[q.x] = true;
            h = h * 6364136223846793005ULL + static_cast<std::uint64_t>(q.y) * 1442695040888963407ULL + q.x;
        }
        std::vector<std::size_t> free;
        for (std::size_t x = 0; x < m; ++x) {
            if (!seen[x]) {
                free.push_back(x);
            }
        }
        return free[(h >> 17) % free.size()];
    });
}

std::vector<std::unique_ptr<SearchPolicy>> builtin_policies() {
    std::vector<std::unique_ptr<SearchPolicy>> out;
    for (const char* name : {"lexicographic", "reverse", "middle-out", "hill-climb"}) {
        out.push_back(make_policy(name));
    }
    out.push_back(make_policy("shuffle", 3));
    out.push_back(make_policy("shuffle", 99));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

TEST(EnumerateFunctions, SingleFunction) {
    const auto fs = collect(enumerate_functions(1, 1));
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0].values, std::vector<int>{0});
}

TEST(EnumerateFunctions, TwoByTwoListing) {
    const auto cls = enumerate_functions(2, 2);
    EXPECT_EQ(cls.size(), 4u);
    std::vector<std::vector<int>> values;
    for (const auto& f : collect(cls)) {
        values.push_back(f.values);
    }
    EXPECT_EQ(values, (std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
}

TEST(EnumerateFunctions, FourByThree) {
    const auto cls = enumerate_functions(4, 3);
    EXPECT_EQ(cls.size(), 81u);
    const auto fs = collect(cls);
    EXPECT_EQ(fs.size(), 81u);
    std::set<std::vector<int>> distinct;
    for (const auto& f : fs) {
        distinct.insert(f.values);
    }
    EXPECT_EQ(distinct.size(), 81u);
}

TEST(EnumerateFunctions, CapEnforced) {
    EXPECT_EQ(code_of([] { enumerate_functions(20, 3); }), ErrorCode::ClassTooLarge);
    EXPECT_EQ(code_of([] { enumerate_functions(5, 3, 242); }), ErrorCode::ClassTooLarge);
    EXPECT_NO_THROW(enumerate_functions(5, 3, 243));
    EXPECT_EQ(code_of([] { enumerate_monotone(30, 30); }), ErrorCode::ClassTooLarge);
}

TEST(FiniteProblem, Validation) {
    EXPECT_NO_THROW((FiniteProblem{3, 2, {0, 1, 1}}.validate()));
    EXPECT_EQ(code_of([] { FiniteProblem{3, 2, {0, 2, 1}}.validate(); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { FiniteProblem{3, 2, {0, 1}}.validate(); }), ErrorCode::InvalidArgument);
    EXPECT_EQ((FiniteProblem{4, 5, {1, 4, 0, 4}}.max_value()), 4);
}

// ---------------------------------------------------------------------------

TEST(RunTrace, FixedOrders) {
    const FiniteProblem f{3, 3, {2, 0, 1}};
    EXPECT_EQ(run_trace(LexicographicPolicy{}, f, 3), (Trace{2, 0, 1}));
    EXPECT_EQ(run_trace(ReversePolicy{}, f, 3), (Trace{1, 0, 2}));
    EXPECT_EQ(run_trace(LexicographicPolicy{}, f, 1), (Trace{2}));
    EXPECT_EQ(run_trace(ReversePolicy{}, f, 1), (Trace{1}));
}

TEST(RunTrace, MiddleOutAndHillClimb) {
    const FiniteProblem f{5, 5, {0, 1, 2, 3, 4}};
    const Trace middle = run_trace(MiddleOutPolicy{}, f, 5);
    EXPECT_EQ(middle.front(), 2);
    EXPECT_EQ(std::set<int>(middle.begin(), middle.end()).size(), 5u);
    // Hill-climb starts at 0 and walks toward the best value seen.
    EXPECT_EQ(run_trace(GreedyNeighborPolicy{}, f, 5), (Trace{0, 1, 2, 3, 4}));
}

TEST(RunTrace, ShuffledPolicyIsAFixedPermutation) {
    const FiniteProblem f{6, 6, {0, 1, 2, 3, 4, 5}};
    const ShuffledPolicy p(12);
    const Trace t = run_trace(p, f, 6);
    EXPECT_EQ(t, run_trace(ShuffledPolicy(12), f, 6));
    EXPECT_EQ(std::set<int>(t.begin(), t.end()).size(), 6u);
    // The order does not depend on observed values.
    const FiniteProblem g{6, 2, {1, 0, 1, 0, 0, 1}};
    const Trace tg = run_trace(p, g, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(tg[i], g.values[static_cast<std::size_t>(t[i])]);
    }
}

TEST(RunTrace, RevisitingPolicyDetected) {
    const CallablePolicy stuck("stuck", [](std::span<const Query>, std::size_t) { return std::size_t{0}; });
    const FiniteProblem f{3, 2, {0, 1, 0}};
    EXPECT_NO_THROW(run_trace(stuck, f, 1));
    EXPECT_EQ(code_of([&] { run_trace(stuck, f, 2); }), ErrorCode::RevisitDetected);
    const CallablePolicy wild("wild", [](std::span<const Query>, std::size_t m) { return m; });
    EXPECT_EQ(code_of([&] { run_trace(wild, f, 1); }), ErrorCode::InvalidArgument);
    const LexicographicPolicy lex;
    const SearchPolicy* ps[] = {&lex, &stuck};
    EXPECT_EQ(code_of([&] { verify_nflt(ps, 3, 2, 3); }), ErrorCode::RevisitDetected);
}

TEST(RunTrace, StepCountChecked) {
    const FiniteProblem f{3, 2, {0, 1, 0}};
    EXPECT_EQ(code_of([&] { run_trace(LexicographicPolicy{}, f, 0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { run_trace(LexicographicPolicy{}, f, 4); }), ErrorCode::InvalidArgument);
}

TEST(MakePolicy, NamesAndErrors) {
    EXPECT_EQ(make_policy("lexicographic")->name(), "lexicographic");
    EXPECT_EQ(make_policy("reverse")->name(), "reverse");
    EXPECT_EQ(make_policy("hill-climb")->name(), "hill-climb");
    EXPECT_EQ(code_of([] { make_policy("oracle"); }), ErrorCode::InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(Histogram, TwoByTwoFirstStep) {
    const auto full = enumerate_functions(2, 2);
    const TraceHistogram expected{{{Trace{0}, 2}, {Trace{1}, 2}}};
    EXPECT_EQ(performance_histogram(LexicographicPolicy{}, 1, full), expected);
    EXPECT_EQ(performance_histogram(ReversePolicy{}, 1, full), expected);
}

TEST(Histogram, ConstantFunctions) {
    std::vector<FiniteProblem> constants;
    for (int y = 0; y < 3; ++y) {
        constants.push_back(FiniteProblem{4, 3, std::vector<int>(4, y)});
    }
    const ExplicitClass cls("constants", constants);
    const TraceHistogram expected{{{Trace{0, 0}, 1}, {Trace{1, 1}, 1}, {Trace{2, 2}, 1}}};
    for (const auto& p : builtin_policies()) {
        EXPECT_EQ(performance_histogram(*p, 2, cls), expected) << p->name();
    }
}

TEST(Histogram, DerivedViews) {
    const TraceHistogram h{{{Trace{0, 2}, 3}, {Trace{1, 0}, 2}, {Trace{2, 1}, 1}}};
    EXPECT_EQ(h.total(), 6u);
    EXPECT_EQ(h.value_at(1), (std::map<int, std::uint64_t>{{0, 3}, {1, 2}, {2, 1}}));
    EXPECT_EQ(h.value_at(2), (std::map<int, std::uint64_t>{{2, 3}, {0, 2}, {1, 1}}));
    EXPECT_EQ(h.best_by(2), (std::map<int, std::uint64_t>{{2, 4}, {1, 2}}));
    EXPECT_EQ(h.prefix(1), (TraceHistogram{{{Trace{0}, 3}, {Trace{1}, 2}, {Trace{2}, 1}}}));
}

TEST(Histogram, EmptyClassRejected) {
    EXPECT_EQ(code_of([] { ExplicitClass("none", {}); }), ErrorCode::InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(VerifyNflt, AcceptanceConfiguration) {
    const LexicographicPolicy lex;
    const ReversePolicy rev;
    const ShuffledPolicy shuf(1);
    const SearchPolicy* ps[] = {&lex, &rev, &shuf};
    const NfltReport rep = verify_nflt(ps, 5, 3, 5);
    EXPECT_EQ(rep.class_size, 243u);
    EXPECT_TRUE(rep.equal);
    EXPECT_TRUE(rep.derived_equal);
    EXPECT_FALSE(rep.counterexample.has_value());
    ASSERT_EQ(rep.histograms.size(), 3u);
    EXPECT_EQ(rep.histograms[0].total(), 243u);
    EXPECT_EQ(rep.policies, (std::vector<std::string>{"lexicographic", "reverse", shuf.name()}));
}

TEST(VerifyNflt, TwoByTwoAnyPair) {
    const LexicographicPolicy lex;
    const ReversePolicy rev;
    const SearchPolicy* ps[] = {&lex, &rev};
    EXPECT_TRUE(verify_nflt(ps, 2, 2, 2).equal);
}

TEST(VerifyNflt, NeedsTwoPolicies) {
    const LexicographicPolicy lex;
    const SearchPolicy* ps[] = {&lex};
    EXPECT_EQ(code_of([&] { verify_nflt(ps, 3, 2, 2); }), ErrorCode::InvalidArgument);
}

TEST(CompareHistograms, RestrictedClassGivesCounterexample) {
    const LexicographicPolicy lex;
    const ReversePolicy rev;
    const SearchPolicy* ps[] = {&lex, &rev};
    const NfltReport rep = compare_histograms(ps, enumerate_monotone(6, 4), 2);
    EXPECT_FALSE(rep.equal);
    EXPECT_FALSE(rep.derived_equal);
    ASSERT_TRUE(rep.counterexample.has_value());
    EXPECT_EQ(rep.counterexample->step, 1u);
    ASSERT_EQ(rep.counterexample->counts.size(), 2u);
    EXPECT_NE(rep.counterexample->counts[0], rep.counterexample->counts[1]);
}

// ---------------------------------------------------------------------------

TEST(Monotone, ClassSizes) {
    EXPECT_EQ(enumerate_monotone(6, 4).size(), 84u);
    const auto fs = collect(enumerate_monotone(6, 4));
    ASSERT_EQ(fs.size(), 84u);
    for (const auto& f : fs) {
        for (std::size_t i = 0; i + 1 < f.m; ++i) {
            ASSERT_LE(f.values[i], f.values[i + 1]);
        }
    }
    for (std::size_t r = 1; r <= 7; ++r) {
        EXPECT_EQ(enumerate_monotone(1, r).size(), r);
        EXPECT_EQ(collect(enumerate_monotone(1, r)).size(), r);
    }
}

TEST(Properties, ClassSizesAgainstBruteForce) {
    for (std::size_t m = 1; m <= 6; ++m) {
        for (std::size_t r = 1; r <= 6; ++r) {
            const auto all = brute_force_all(m, r);
            ASSERT_EQ(all.size(), ipow(r, m));
            std::vector<std::vector<int>> listed;
            for (const auto& f : collect(enumerate_functions(m, r))) {
                listed.push_back(f.values);
            }
            ASSERT_EQ(listed, all) << m << " " << r;

            std::vector<std::vector<int>> monotone;
            for (const auto& v : all) {
                if (std::is_sorted(v.begin(), v.end())) {
                    monotone.push_back(v);
                }
            }
            std::vector<std::vector<int>> emitted;
            for (const auto& f : collect(enumerate_monotone(m, r))) {
                emitted.push_back(f.values);
            }
            ASSERT_EQ(emitted, monotone) << m << " " << r;
            ASSERT_EQ(enumerate_monotone(m, r).size(), binomial(m + r - 1, m));
        }
    }
}

TEST(Binomial, ValuesAndSaturation) {
    EXPECT_EQ(binomial(9, 6), 84u);
    EXPECT_EQ(binomial(5, 0), 1u);
    EXPECT_EQ(binomial(5, 5), 1u);
    EXPECT_EQ(binomial(3, 4), 0u);
    EXPECT_EQ(binomial(52, 5), 2598960u);
    EXPECT_EQ(binomial(200, 100), UINT64_MAX);
}

TEST(Properties, BinomialPascalRule) {
    for (std::uint64_t n = 1; n <= 60; ++n) {
        for (std::uint64_t k = 1; k < n; ++k) {
            ASSERT_EQ(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k)) << n << " " << k;
        }
    }
}

// ---------------------------------------------------------------------------

TEST(CompareOnClass, MonotoneSeparation) {
    const LexicographicPolicy bottom;
    const ReversePolicy top;
    const SearchPolicy* ps[] = {&top, &bottom};
    const SuccessTable t = compare_on_class(ps, enumerate_monotone(6, 4), 6);
    EXPECT_EQ(t.class_size, 84u);
    EXPECT_EQ(t.successes[0][0], 84u);
    EXPECT_EQ(t.successes[1][0], 4u);
    EXPECT_DOUBLE_EQ(t.fraction(0, 1), 1.0);
    EXPECT_NEAR(t.fraction(1, 1), 0.0476, 5e-5);
    EXPECT_EQ(t.successes[1][5], 84u);
    for (std::size_t j = 1; j < 6; ++j) {
        EXPECT_LE(t.successes[1][j - 1], t.successes[1][j]);
    }
}

TEST(CompareOnClass, FullClassColumnsIdentical) {
    const auto policies = builtin_policies();
    std::vector<const SearchPolicy*> ps;
    for (const auto& p : policies) {
        ps.push_back(p.get());
    }
    const CallablePolicy hashed = hashed_policy(5);
    ps.push_back(&hashed);
    const SuccessTable t = compare_on_class(ps, enumerate_functions(5, 3), 5);
    // Independent count: functions whose maximum is among the first j lexicographic cells.
    std::vector<std::uint64_t> oracle(5, 0);
    for (const auto& v : brute_force_all(5, 3)) {
        const int top = *std::max_element(v.begin(), v.end());
        for (std::size_t j = 1; j <= 5; ++j) {
            oracle[j - 1] += std::find(v.begin(), v.begin() + static_cast<long>(j), top) != v.begin() + static_cast<long>(j) ? 1 : 0;
        }
    }
    for (std::size_t p = 0; p < ps.size(); ++p) {
        EXPECT_EQ(t.successes[p], oracle) << ps[p]->name();
    }
}

// ---------------------------------------------------------------------------

TEST(Properties, PermutationLemma) {
    // Over Y^X every length-k trace occurs exactly r^(m-k) times, whatever the policy.
    RngStream rng(1);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t m = 1 + rng.uniform_index(6);
        const std::size_t r = 1 + rng.uniform_index(4);
        const std::size_t k = 1 + rng.uniform_index(m);
        const CallablePolicy hashed = hashed_policy(rng.next_u64());
        const TraceHistogram h = performance_histogram(hashed, k, enumerate_functions(m, r));
        ASSERT_EQ(h.counts.size(), ipow(r, k));
        for (const auto& [trace, count] : h.counts) {
            ASSERT_EQ(trace.size(), k);
            ASSERT_EQ(count, ipow(r, m - k));
        }
        ASSERT_EQ(h, performance_histogram(LexicographicPolicy{}, k, enumerate_functions(m, r)));
    }
}

TEST(Properties, ExactnessForAllBuiltInPairs) {
    const auto policies = builtin_policies();
    std::vector<CallablePolicy> hashed;
    for (std::uint64_t salt = 1; salt <= 3; ++salt) {
        hashed.push_back(hashed_policy(salt));
    }
    std::vector<const SearchPolicy*> ps;
    for (const auto& p : policies) {
        ps.push_back(p.get());
    }
    for (const auto& h : hashed) {
        ps.push_back(&h);
    }
    int cases = 0;
    for (std::size_t m = 1; m <= 16; ++m) {
        for (std::size_t r = 1; r <= 8; ++r) {
            if (ipow(r, m) > 100'000 / 20) {
                continue;
            }
            // The report compares every prefix 1..m, covering all k at once.
            const NfltReport rep = verify_nflt(ps, m, r, m);
            ASSERT_TRUE(rep.equal) << "m " << m << " r " << r;
            ASSERT_TRUE(rep.derived_equal) << "m " << m << " r " << r;
            ++cases;
        }
    }
    EXPECT_GT(cases, 20);
}

TEST(Properties, ExactnessAtTheSizeLimit) {
    const LexicographicPolicy lex;
    const GreedyNeighborPolicy hill;
    const CallablePolicy hashed = hashed_policy(77);
    const SearchPolicy* ps[] = {&lex, &hill, &hashed};
    for (const auto& [m, r] : std::vector<std::pair<std::size_t, std::size_t>>{{16, 2}, {10, 3}, {8, 4}, {7, 5}, {2, 300}}) {
        ASSERT_LE(ipow(r, m), 100'000u);
        EXPECT_TRUE(verify_nflt(ps, m, r, m).equal) << m << " " << r;
    }
}

TEST(Properties, HistogramMergeIsAssociativeAndCommutative) {
    RngStream rng(2);
    auto random_hist = [&] {
        TraceHistogram h;
        const std::size_t n = rng.uniform_index(12);
        for (std::size_t i = 0; i < n; ++i) {
            Trace t(1 + rng.uniform_index(3));
            for (auto& v : t) {
                v = static_cast<int>(rng.uniform_index(3));
            }
            h.counts[t] += 1 + rng.uniform_index(5);
        }
        return h;
    };
    for (int rep = 0; rep < 200; ++rep) {
        const TraceHistogram a = random_hist();
        const TraceHistogram b = random_hist();
        const TraceHistogram c = random_hist();
        TraceHistogram left = a;
        left.merge(b);
        left.merge(c);
        TraceHistogram bc = b;
        bc.merge(c);
        TraceHistogram right = a;
        right.merge(bc);
        ASSERT_EQ(left, right);
        TraceHistogram ba = b;
        ba.merge(a);
        TraceHistogram ab = a;
        ab.merge(b);
        ASSERT_EQ(ab, ba);
        ASSERT_EQ(ab.total(), a.total() + b.total());
    }
}

TEST(Properties, PartitionedEnumerationMatches) {
    const auto full = collect(enumerate_functions(6, 3));
    const ShuffledPolicy p(4);
    TraceHistogram merged;
    for (std::size_t part = 0; part < 4; ++part) {
        std::vector<FiniteProblem> chunk;
        for (std::size_t i = part; i < full.size(); i += 4) {
            chunk.push_back(full[i]);
        }
        merged.merge(performance_histogram(p, 4, ExplicitClass("chunk", chunk)));
    }
    EXPECT_EQ(merged, performance_histogram(p, 4, enumerate_functions(6, 3)));
}
