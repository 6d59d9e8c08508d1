#include <cmath>

#include <gtest/gtest.h>

#include "intentsketch/types.hpp"
#include "support.hpp"

using namespace intentsketch;

namespace {

ErrorCode code_of(const OmniInput& x) {
    try {
        validate_input(x);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a validation error";
    return ErrorCode::ConfigError;
}

}  // namespace

TEST(OmniInput, MinimalItemIsValid) {
    OmniInput x;
    x.query = "q";
    x.options = {{"A", "yes"}, {"B", "no"}};
    x.gold = "A";
    EXPECT_NO_THROW(validate_input(x));
}

TEST(OmniInput, RejectsBadItems) {
    OmniInput empty;
    empty.options = {{"A", "yes"}, {"B", "no"}};
    EXPECT_EQ(code_of(empty), ErrorCode::EmptyQuery);

    OmniInput dup;
    dup.query = "q";
    dup.options = {{"A", "yes"}, {"A", "no"}};
    EXPECT_EQ(code_of(dup), ErrorCode::DuplicateSlotLabel);

    OmniInput single;
    single.query = "q";
    single.options = {{"A", "yes"}};
    EXPECT_EQ(code_of(single), ErrorCode::TooFewOptions);

    OmniInput stray = testing_support::mc_item();
    stray.gold = "E";
    EXPECT_EQ(code_of(stray), ErrorCode::GoldNotInOptions);
}

TEST(OmniInput, FreeFormHasNoSlots) {
    OmniInput x;
    x.query = "What is said first?";
    EXPECT_FALSE(x.is_multiple_choice());
    EXPECT_NO_THROW(validate_input(x));
}

TEST(OmniInput, JsonRoundTripFoldsUnknownKeysIntoMeta) {
    const auto j = nlohmann::json::parse(
        R"({"id":"x1","query":"q?","options":[{"label":"A","text":"a"},{"label":"B","text":"b"}],)"
        R"("gold":"B","video":"v.mp4","source":"bench"})");
    const auto x = j.get<OmniInput>();
    EXPECT_EQ(x.id, "x1");
    EXPECT_EQ(x.video.value_or(""), "v.mp4");
    EXPECT_FALSE(x.audio.has_value());
    EXPECT_EQ(x.meta.at("source"), "bench");
    EXPECT_EQ(nlohmann::json(x).get<OmniInput>(), x);
}

TEST(AnswerPosterior, MakePosteriorRenormalizesNearlyNormalInput) {
    const auto p = make_posterior({"A", "B"}, {0.5000004, 0.5}, PosteriorSource::logprob);
    EXPECT_NEAR(p.probs[0] + p.probs[1], 1.0, 1e-15);
    EXPECT_NEAR(p.entropy_nats, std::log(2.0), 1e-9);
    EXPECT_NO_THROW(validate(p));
}

TEST(AnswerPosterior, RejectsInconsistentEntropy) {
    auto p = make_posterior({"A", "B"}, {0.9, 0.1}, PosteriorSource::logprob);
    p.entropy_nats = 0.0;
    EXPECT_THROW(validate(p), Error);
    EXPECT_THROW(make_posterior({"A", "B"}, {0.9, 0.2}, PosteriorSource::logprob), Error);
    EXPECT_THROW(make_posterior({"A", "B"}, {1.1, -0.1}, PosteriorSource::logprob), Error);
}

TEST(ClassDistribution, Validation) {
    EXPECT_NO_THROW(validate(ClassDistribution{{0, 1}, {0.25, 0.75}}));
    EXPECT_THROW(validate(ClassDistribution{{0, 1}, {0.25}}), Error);
    EXPECT_THROW(validate(ClassDistribution{{0, 1}, {0.25, 0.76}}), Error);
}

TEST(ObjectiveWeights, MustBePositive) {
    EXPECT_NO_THROW(validate(ObjectiveWeights{0.5, 1.0}));
    EXPECT_THROW(validate(ObjectiveWeights{0.0, 1.0}), Error);
    EXPECT_THROW(validate(ObjectiveWeights{0.5, -1.0}), Error);
}

TEST(ReasoningOutcome, JsonRoundTrip) {
    ReasoningOutcome o;
    o.answer = "C";
    o.trace = "because\nANSWER: C";
    o.selected_sketch_index = 2;
    o.per_candidate_entropies = {1.0, 0.5, 0.25};
    o.intent = "find the cause";
    o.sketches = {"s0", "s1", "s2"};
    o.latency_ms = 42;
    EXPECT_EQ(nlohmann::json(o).get<ReasoningOutcome>(), o);
}

TEST(Error, CarriesStageAndLine) {
    const Error e(ErrorCode::ParseError, "bad json", 7);
    EXPECT_EQ(e.line().value_or(0), 7u);
    const Error staged = Error(ErrorCode::EmptyCompletion, "nothing").with_stage("intent");
    EXPECT_EQ(staged.stage(), "intent");
    EXPECT_EQ(staged.code(), ErrorCode::EmptyCompletion);
    EXPECT_NE(std::string(staged.what()).find("intent"), std::string::npos);
}

TEST(Tokens, WhitespaceCount) {
    EXPECT_EQ(count_tokens(""), 0);
    EXPECT_EQ(count_tokens("  find   the speaker's goal \n"), 4);
}
