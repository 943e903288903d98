#include <gtest/gtest.h>

#include <map>

#include "common.hpp"

using namespace lbvc;

namespace {

bool has_rule(const std::vector<ScheduleViolation>& v, const std::string& rule, int idx)
{
    for (const ScheduleViolation& x : v) {
        if (x.rule == rule && x.display_index == idx) {
            return true;
        }
    }
    return false;
}

} // namespace

TEST(BuildSchedule, ThirtyThreeFrames)
{
    const Schedule s = build_schedule(33);
    EXPECT_EQ(s.at(0).type, FrameType::Intra);
    EXPECT_EQ(s.at(32).type, FrameType::Intra);
    EXPECT_EQ(s.at(16).temporal_level, 1);
    EXPECT_EQ(*s.at(16).ref_fwd, 0);
    EXPECT_EQ(*s.at(16).ref_bwd, 32);
    EXPECT_DOUBLE_EQ(s.at(16).distortion_weight, 1.1);
    for (int t : {8, 24}) {
        EXPECT_EQ(s.at(t).temporal_level, 2);
        EXPECT_DOUBLE_EQ(s.at(t).distortion_weight, 1.1);
    }
    for (int t : {4, 12, 20, 28}) {
        EXPECT_EQ(s.at(t).temporal_level, 3);
        EXPECT_DOUBLE_EQ(s.at(t).distortion_weight, 0.7);
    }
    for (int t = 2; t < 32; t += 4) {
        EXPECT_EQ(s.at(t).temporal_level, 4);
        EXPECT_DOUBLE_EQ(s.at(t).distortion_weight, 0.6);
    }
    for (int t = 1; t < 32; t += 2) {
        EXPECT_EQ(s.at(t).temporal_level, 5);
        EXPECT_DOUBLE_EQ(s.at(t).distortion_weight, 0.5);
        EXPECT_EQ(*s.at(t).ref_fwd, t - 1);
        EXPECT_EQ(*s.at(t).ref_bwd, t + 1);
    }
    EXPECT_TRUE(validate_schedule(s).empty());
}

TEST(BuildSchedule, SingleFrame)
{
    const Schedule s = build_schedule(1);
    ASSERT_EQ(s.units.size(), 1u);
    EXPECT_EQ(s.units[0].type, FrameType::Intra);
    EXPECT_EQ(s.units[0].coding_order, 0);
    EXPECT_TRUE(validate_schedule(s).empty());
}

TEST(BuildSchedule, FiveFramesGopFour)
{
    const Schedule s = build_schedule(5, 4, 4);
    EXPECT_EQ(s.at(0).type, FrameType::Intra);
    EXPECT_EQ(s.at(4).type, FrameType::Intra);
    EXPECT_EQ(*s.at(2).ref_fwd, 0);
    EXPECT_EQ(*s.at(2).ref_bwd, 4);
    EXPECT_EQ(*s.at(1).ref_fwd, 0);
    EXPECT_EQ(*s.at(1).ref_bwd, 2);
    EXPECT_EQ(*s.at(3).ref_fwd, 2);
    EXPECT_EQ(*s.at(3).ref_bwd, 4);
    // Coding order: anchors, then level 1, then level 2 left to right.
    std::vector<int> order;
    for (const CodingUnit* u : s.in_coding_order()) {
        order.push_back(u->display_index);
    }
    EXPECT_EQ(order, (std::vector<int>{0, 4, 2, 1, 3}));
}

TEST(BuildSchedule, NinetySevenFramesValid)
{
    const Schedule s = build_schedule(97, 32, 32);
    EXPECT_TRUE(validate_schedule(s).empty());
    for (int g = 0; g < 3; ++g) {
        std::map<int, int> pop;
        for (int t = 32 * g + 1; t < 32 * (g + 1); ++t) {
            ++pop[s.at(t).temporal_level];
        }
        EXPECT_EQ(pop, (std::map<int, int>{{1, 1}, {2, 2}, {3, 4}, {4, 8}, {5, 16}}));
    }
}

TEST(BuildSchedule, ReferencesAreSymmetricInFullGops)
{
    const Schedule s = build_schedule(65, 32, 32);
    for (const CodingUnit& u : s.units) {
        if (u.type == FrameType::B) {
            EXPECT_EQ(u.display_index - *u.ref_fwd, *u.ref_bwd - u.display_index);
        }
    }
}

TEST(BuildSchedule, TailGopIsTruncatedDyadic)
{
    const Schedule s = build_schedule(40, 32, 32);
    EXPECT_TRUE(validate_schedule(s).empty());
    EXPECT_EQ(s.at(39).type, FrameType::Intra);
    // Tail interval [32, 39]: midpoint 35, then 33 and 37, then 34, 36, 38.
    EXPECT_EQ(s.at(35).temporal_level, 1);
    EXPECT_EQ(*s.at(35).ref_fwd, 32);
    EXPECT_EQ(*s.at(35).ref_bwd, 39);
    EXPECT_EQ(s.at(33).temporal_level, 2);
    EXPECT_EQ(s.at(37).temporal_level, 2);
    EXPECT_EQ(s.at(38).temporal_level, 3);
    EXPECT_EQ(*s.at(38).ref_fwd, 37);
    EXPECT_EQ(*s.at(38).ref_bwd, 39);
}

TEST(BuildSchedule, LongIntraPeriodKeepsGopAnchorsIntra)
{
    const Schedule s = build_schedule(65, 16, 32);
    EXPECT_TRUE(validate_schedule(s).empty());
    for (int a : {0, 16, 32, 48, 64}) {
        EXPECT_EQ(s.at(a).type, FrameType::Intra) << a;
    }
}

TEST(BuildSchedule, WeightsPerLevel)
{
    const Schedule s = build_schedule(33);
    for (const CodingUnit& u : s.units) {
        if (u.type == FrameType::B) {
            EXPECT_EQ(u.distortion_weight, kLevelWeights[static_cast<std::size_t>(u.temporal_level - 1)]);
        }
    }
    EXPECT_THROW(level_weight(0), ParameterError);
    EXPECT_THROW(level_weight(6), ParameterError);
}

TEST(BuildSchedule, ParameterErrors)
{
    EXPECT_THROW(build_schedule(0), ParameterError);
    EXPECT_THROW(build_schedule(10, 12, 12), ParameterError);
    EXPECT_THROW(build_schedule(10, 1, 1), ParameterError);
    EXPECT_THROW(build_schedule(10, 8, 12), ParameterError);
    EXPECT_THROW(build_schedule(10, 8, 4), ParameterError);
}

TEST(ValidateSchedule, DependencyViolation)
{
    Schedule s = build_schedule(5, 4, 4);
    // Frame 1 references 2; make 2 code after 1.
    std::swap(s.units[1].coding_order, s.units[2].coding_order);
    const auto v = validate_schedule(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, "dependency");
    EXPECT_EQ(v[0].display_index, 1);
}

TEST(ValidateSchedule, WeightViolation)
{
    Schedule s = build_schedule(33);
    s.units[4].distortion_weight = 0.6;
    const auto v = validate_schedule(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, "weight");
    EXPECT_EQ(v[0].display_index, 4);
}

TEST(ValidateSchedule, OtherRules)
{
    Schedule s = build_schedule(9, 8, 8);
    s.units[8].type = FrameType::B;
    s.units[8].temporal_level = 1;
    s.units[8].distortion_weight = 1.1;
    auto v = validate_schedule(s);
    EXPECT_TRUE(has_rule(v, "intra-period", 8));
    EXPECT_TRUE(has_rule(v, "b-refs", 8));

    s = build_schedule(9, 8, 8);
    s.units[3].temporal_level = 2;
    s.units[3].distortion_weight = 1.1;
    EXPECT_TRUE(has_rule(validate_schedule(s), "level", 3));

    s = build_schedule(9, 8, 8);
    s.units[0].ref_fwd = 4;
    EXPECT_TRUE(has_rule(validate_schedule(s), "intra-refs", 0));

    s = build_schedule(9, 8, 8);
    s.units[5].coding_order = s.units[6].coding_order;
    EXPECT_TRUE(has_rule(validate_schedule(s), "coding-order", -1));

    s = build_schedule(9, 8, 8);
    s.units[2].display_index = 3;
    v = validate_schedule(s);
    EXPECT_TRUE(has_rule(v, "coverage", 2));
    EXPECT_TRUE(has_rule(v, "coverage", 3));

    EXPECT_TRUE(has_rule(validate_schedule(Schedule{}), "coverage", -1));
}
