#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "splinetool/slope_constraints.hpp"
#include "support/generators.hpp"

using namespace splinetool;

namespace {

std::vector<double> values(const NodalSpline& sp) { return {sp.values().begin(), sp.values().end()}; }

} // namespace

TEST(SlopeBounds, RequiresStrictOrder) {
    EXPECT_THROW(SlopeBounds(1.0, 1.0), Error);
    EXPECT_THROW(SlopeBounds(2.0, 1.0), Error);
    EXPECT_THROW(SlopeBounds(std::nan(""), 1.0), Error);
    try {
        SlopeBounds(1.0, 0.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidBounds);
    }
    const SlopeBounds one_sided(0.0, kInf);
    EXPECT_TRUE(one_sided.has_lower());
    EXPECT_FALSE(one_sided.has_upper());
    EXPECT_EQ(one_sided.clip(-3.0), 0.0);
    EXPECT_EQ(one_sided.violation(-3.0), 3.0);
}

TEST(DividedDifference, Examples) {
    const Grid g = Grid::make({0, 1, 2});
    const std::vector<double> ones{1, 1, 1};
    EXPECT_EQ(apply_divided_difference(g, ones).s, (std::vector<double>{0, 0, 0}));
    const std::vector<double> f{0, 2, 1};
    EXPECT_EQ(apply_divided_difference(g, f).s, (std::vector<double>{2, 2, -1}));
    const std::vector<double> short_f{0, 1};
    EXPECT_THROW(apply_divided_difference(g, short_f), Error);
}

TEST(DividedDifference, Linearity) {
    testsupport::Rng rng(10);
    const Grid g = testsupport::random_grid(rng, 9);
    std::vector<double> f(9), h(9), sum(9);
    for (std::size_t n = 0; n < 9; ++n) {
        f[n] = testsupport::uniform(rng, -1, 1);
        h[n] = testsupport::uniform(rng, -1, 1);
        sum[n] = f[n] + h[n];
    }
    const SlopeVector a = apply_divided_difference(g, f);
    const SlopeVector b = apply_divided_difference(g, h);
    const SlopeVector c = apply_divided_difference(g, sum);
    for (std::size_t n = 0; n < 9; ++n) EXPECT_NEAR(c[n], a[n] + b[n], 1e-12);
}

TEST(RightInverse, Examples) {
    const Grid g = Grid::make({0, 1, 2});
    EXPECT_EQ(apply_right_inverse(g, {{0, 0, 0}}), (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(apply_right_inverse(g, {{1, 1, 1}}), (std::vector<double>{-1, 0, 1}));
    EXPECT_THROW(apply_right_inverse(g, {{1, 0, 1}}), Error);
}

TEST(RightInverse, IsRightInverseWithZeroSum) {
    testsupport::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = testsupport::uniform_index(rng, 2, 20);
        const Grid g = testsupport::random_grid(rng, n);
        SlopeVector s{std::vector<double>(n)};
        for (std::size_t k = 1; k < n; ++k) s.s[k] = testsupport::uniform(rng, -3, 3);
        s.s[0] = s.s[1];
        const std::vector<double> f = apply_right_inverse(g, s);
        EXPECT_NEAR(mean(f), 0.0, 1e-12);
        const SlopeVector back = apply_divided_difference(g, f);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(back[k], s[k], 1e-11);
    }
}

TEST(Project, WorkedExample) {
    const NodalSpline out = project_slopes(NodalSpline::make({0, 1, 2}, {0, 2, 1}), {0.0, 1.0});
    EXPECT_NEAR(out.value(0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(out.value(1), 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(out.value(2), 4.0 / 3.0, 1e-15);
}

TEST(Project, FeasibleInputsUnchanged) {
    const NodalSpline st = NodalSpline::make({-2, -1, 1, 2}, {-1, 0, 0, 1});
    EXPECT_EQ(values(project_slopes(st, {0.0, 1.0})), values(st));
    testsupport::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const NodalSpline sp = testsupport::random_spline(rng, 8);
        EXPECT_EQ(values(project_slopes(sp, SlopeBounds::unbounded())), values(sp));
    }
}

TEST(Project, AlgebraicProperties) {
    testsupport::Rng rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const NodalSpline sp = testsupport::random_spline(rng, testsupport::uniform_index(rng, 2, 25));
        const SlopeBounds b = testsupport::random_bounds(rng);
        const NodalSpline p = project_slopes(sp, b);
        const NodalSpline pp = project_slopes(p, b);
        for (std::size_t n = 0; n < sp.size(); ++n) EXPECT_NEAR(pp.value(n), p.value(n), 1e-12);
        EXPECT_NEAR(mean(p.values()), mean(sp.values()), 1e-12);
        const SlopeRange r = slope_range(p);
        EXPECT_GE(r.s_min, b.lower() - 1e-12);
        EXPECT_LE(r.s_max, b.upper() + 1e-12);

        // Adding a constant shifts the projection by the same constant.
        std::vector<double> shifted = values(sp);
        for (double& v : shifted) v += 2.5;
        const NodalSpline ps = project_slopes(NodalSpline(sp.grid(), shifted), b);
        for (std::size_t n = 0; n < sp.size(); ++n) EXPECT_NEAR(ps.value(n), p.value(n) + 2.5, 1e-12);
    }
}

TEST(Classify, Examples) {
    const MonotonicityClass st = classify(NodalSpline::make({-2, -1, 1, 2}, {-1, 0, 0, 1}));
    EXPECT_TRUE(st.nondecreasing);
    EXPECT_TRUE(st.firmly_nonexpansive);
    EXPECT_TRUE(st.one_lipschitz);
    EXPECT_FALSE(st.rho_strong.has_value());
    EXPECT_FALSE(st.rho_weak.has_value());

    const MonotonicityClass twice = classify(NodalSpline::make({0, 1}, {0, 2}));
    EXPECT_TRUE(twice.nondecreasing);
    EXPECT_FALSE(twice.firmly_nonexpansive);
    EXPECT_FALSE(twice.one_lipschitz);
    ASSERT_TRUE(twice.rho_strong.has_value());
    EXPECT_EQ(*twice.rho_strong, 2.0);

    const MonotonicityClass weak = classify(NodalSpline::make({0, 1, 2}, {0, -0.5, 0.5}));
    EXPECT_FALSE(weak.nondecreasing);
    EXPECT_TRUE(weak.one_lipschitz);
    ASSERT_TRUE(weak.rho_weak.has_value());
    EXPECT_EQ(*weak.rho_weak, 0.5);
}

TEST(Classify, FlagsMatchSlopeRange) {
    testsupport::Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const NodalSpline sp = testsupport::random_spline(rng, 5, 1.0);
        const SlopeRange r = slope_range(sp);
        const MonotonicityClass c = classify(sp);
        EXPECT_EQ(c.nondecreasing, r.s_min >= 0);
        EXPECT_EQ(c.firmly_nonexpansive, r.s_min >= 0 && r.s_max <= 1);
        EXPECT_EQ(c.one_lipschitz, r.s_min >= -1 && r.s_max <= 1);
    }
}
