#include "adxprobe/error.hpp"
#include "adxprobe/persona.hpp"
#include "adxprobe/run.hpp"
#include "adxprobe/taxonomy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace adxprobe;

namespace {

std::vector<std::string> controls()
{
    return {"https://c0/", "https://c1/", "https://c2/", "https://c3/", "https://c4/"};
}

std::vector<LabeledPage> labeled(int finance, int sports)
{
    std::vector<LabeledPage> out;
    for (int i = 0; i < finance; ++i)
        out.push_back({"https://f" + std::to_string(i) + "/", "金融"});
    for (int i = 0; i < sports; ++i)
        out.push_back({"https://s" + std::to_string(i) + "/", "体育"});
    return out;
}

PersonaSpec finance_spec()
{
    return make_persona("finance", "金融", labeled(14, 3), controls(), {"UA", "finance"}).spec;
}

} // namespace

TEST(MakePersona, TakesTopTenInRankingOrder)
{
    const auto b = make_persona("finance", "金融", labeled(14, 3), controls(), {"UA", "finance"});
    ASSERT_EQ(b.spec.training_pages.size(), 10u);
    EXPECT_EQ(b.spec.training_pages.front(), "https://f0/");
    EXPECT_EQ(b.spec.training_pages.back(), "https://f9/");
    EXPECT_TRUE(b.warnings.empty());
}

TEST(MakePersona, FewerPagesWarns)
{
    const auto b = make_persona("sport", "体育", labeled(2, 3), controls(), {"UA", "s"});
    EXPECT_EQ(b.spec.training_pages.size(), 3u);
    EXPECT_EQ(b.warnings.size(), 1u);
}

TEST(MakePersona, BlankHasNoTrainingPages)
{
    const auto b = make_persona("blank", kBlankInterest, labeled(5, 5), controls(), {"UA", "blank"});
    EXPECT_TRUE(b.spec.training_pages.empty());
    EXPECT_TRUE(b.spec.is_blank());
    EXPECT_EQ(b.spec.pool(), controls());
}

TEST(MakePersona, ControlPagesNeverTrain)
{
    auto pages = labeled(3, 0);
    pages.insert(pages.begin(), {"https://c0/", "金融"});
    const auto b = make_persona("f", "金融", pages, controls(), {"UA", "f"});
    for (const auto& p : b.spec.training_pages)
        EXPECT_NE(p, "https://c0/");
}

TEST(MakePersona, Errors)
{
    EXPECT_THROW(make_persona("x", "不存在", labeled(3, 3), controls(), {"UA", "x"}), InputError);
    auto four = controls();
    four.pop_back();
    EXPECT_THROW(make_persona("x", "金融", labeled(3, 3), four, {"UA", "x"}), InputError);
    const Taxonomy t(std::vector<Category>{{"旅游", {"旅行"}}});
    EXPECT_THROW(make_persona("x", "旅游", labeled(3, 3), controls(), {"UA", "x"}, &t), InputError);
}

TEST(Schedule, DeterministicAndBounded)
{
    const auto spec = finance_spec();
    const auto a = schedule_visits(spec, 3, 180, 99);
    const auto b = schedule_visits(spec, 3, 180, 99);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].at, b[i].at);
        EXPECT_EQ(a[i].page, b[i].page);
    }
    EXPECT_NE(schedule_visits(spec, 3, 180, 100).front().at, a.front().at);
    for (std::size_t i = 1; i < a.size(); ++i)
        EXPECT_GT(a[i].at, a[i - 1].at);
    EXPECT_LT(a.back().at, 3 * 86400.0);
    for (const auto& e : a)
        EXPECT_EQ(e.kind, std::find(spec.control_pages.begin(), spec.control_pages.end(), e.page) != spec.control_pages.end()
                              ? VisitKind::Control
                              : VisitKind::Training);
}

TEST(Schedule, StartOffsetAndDayIndex)
{
    ScheduleOptions o;
    o.day_length = 100;
    o.start_at = 300;
    const auto ev = schedule_visits(finance_spec(), 2, 10, 5, o);
    ASSERT_FALSE(ev.empty());
    EXPECT_GE(ev.front().at, 300);
    EXPECT_LT(ev.back().at, 500);
    EXPECT_EQ(day_index(0, 100), 1);
    EXPECT_EQ(day_index(99.9, 100), 1);
    EXPECT_EQ(day_index(100, 100), 2);
    EXPECT_EQ(day_index(ev.front().at, 100), 4);
}

TEST(Schedule, GapMeanAndPageUniformity)
{
    const auto spec = finance_spec();
    ScheduleOptions o;
    o.day_length = 2.5e6;
    const auto ev = schedule_visits(spec, 1, 180, 2024, o);
    ASSERT_GT(ev.size(), 10000u);
    double prev = 0, sum = 0;
    std::map<std::string, int> counts;
    for (std::size_t i = 0; i < 10000; ++i) {
        sum += ev[i].at - prev;
        prev = ev[i].at;
        ++counts[ev[i].page];
    }
    EXPECT_NEAR(sum / 10000, 180.0, 9.0);
    const double expected = 10000.0 / 15;
    double chi2 = 0;
    for (const auto& [_, n] : counts)
        chi2 += (n - expected) * (n - expected) / expected;
    EXPECT_EQ(counts.size(), 15u);
    EXPECT_LT(chi2, 29.141);
}

TEST(Schedule, RejectsBadParameters)
{
    EXPECT_THROW(schedule_visits(finance_spec(), 0, 180, 1), InputError);
    EXPECT_THROW(schedule_visits(finance_spec(), 1, 0, 1), InputError);
}

TEST(Rng, OpenUnitAndUniformIndex)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = open_unit(rng);
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(uniform_index(rng, 7), 7u);
    }
}

TEST(PersonaPlan, PhasesSwitchOnDay)
{
    PersonaPlan plan;
    plan.name = "finance";
    plan.seed = 3;
    auto first = finance_spec();
    auto second = make_persona("finance", "体育", labeled(3, 6), controls(), {"UA", "finance"}).spec;
    plan.phases = {{1, first}, {4, second}};
    plan.validate();
    EXPECT_EQ(plan.spec_for_day(3).interest, "金融");
    EXPECT_EQ(plan.spec_for_day(4).interest, "体育");
    RunOptions o;
    o.day_length = 1000;
    o.mean_gap = 20;
    o.horizon_days = 6;
    const auto ev = plan_schedule(plan, o);
    for (const auto& e : ev) {
        const int d = day_index(e.at, o.day_length);
        const auto& pool = plan.spec_for_day(d).pool();
        EXPECT_NE(std::find(pool.begin(), pool.end(), e.page), pool.end());
    }
    plan.phases[1].spec.identity.cookie_jar = "other";
    EXPECT_THROW(plan.validate(), InputError);
}
