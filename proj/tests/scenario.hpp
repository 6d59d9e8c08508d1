#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "intentsketch/pipeline.hpp"
#include "support.hpp"

namespace testing_support {

namespace ip = intentsketch::pipeline;

/// A seeded scripted world for whole-pipeline runs. The generator hands out
/// distinct sketches in call order; each sketch has its own scripted
/// evaluator posterior, peaked at a random label with a distinct peak mass,
/// so entropies are pairwise distinct and the minimum is strict.
struct ScriptedScenario {
    static constexpr const char* kPerceiver = "perceiver";
    static constexpr const char* kLm = "lm";
    static constexpr const char* kEngine = "engine";

    MockEnv env;
    std::vector<std::string> sketch_texts;
    std::vector<std::vector<double>> posteriors;  // parallel to sketch_texts
    std::string engine_answer = "B";

    explicit ScriptedScenario(std::uint64_t seed, int raw_sketches = 6) {
        std::mt19937_64 rng(seed);
        std::vector<double> peaks = {0.30, 0.38, 0.46, 0.54, 0.62, 0.70, 0.78, 0.86, 0.94};
        std::shuffle(peaks.begin(), peaks.end(), rng);
        static const char* vocab[] = {"trace",   "list",    "compare", "align",  "count",  "isolate", "order",
                                      "contrast", "sounds", "gestures", "faces", "events", "voices", "objects",
                                      "cuts",    "captions", "timing",  "speaker", "motion", "lighting", "pauses",
                                      "tone",    "glances", "hands",   "music",  "doors",  "crowd",   "silence"};
        for (int k = 0; k < raw_sketches; ++k) {
            std::string text = "Plan " + std::to_string(seed) + "-" + std::to_string(k) + ":";
            for (int w = 0; w < 6; ++w) text += std::string(" ") + vocab[rng() % std::size(vocab)];
            sketch_texts.push_back(text + ".");
            const double peak = peaks[static_cast<std::size_t>(k) % peaks.size()];
            std::vector<double> p(4, (1.0 - peak) / 3.0);
            p[rng() % 4] = peak;
            posteriors.push_back(p);
        }
        engine_answer = std::string(1, static_cast<char>('A' + rng() % 4));

        env.add(kPerceiver);
        env.add(kLm);
        env.add(kEngine);

        env.rule("You are an intent perceiver", {intentsketch::backends::MockReply::ok("intent: find speaker's goal")});
        auto next = std::make_shared<std::atomic<std::size_t>>(0);
        auto texts = sketch_texts;
        env.responder("You are a policy provider", [next, texts](const ib::MockCall&) {
            return ib::MockReply::ok(texts[(*next)++ % texts.size()]);
        });
        env.responder("Restate the reasoning strategy", [texts](const ib::MockCall& c) {
            for (const auto& t : texts) {
                if (c.prompt.find(t) != std::string::npos) return ib::MockReply::ok(t);
            }
            return ib::MockReply::ok("unrecognized");
        });
        auto post = posteriors;
        env.responder("You are a strategy evaluator", [texts, post](const ib::MockCall& c) {
            for (std::size_t k = 0; k < texts.size(); ++k) {
                if (c.prompt.find(texts[k]) != std::string::npos) return weights_reply(post[k]);
            }
            return ib::MockReply::ok("unrecognized");
        });
        env.rule("Reason step by step", {ib::MockReply::ok("Considering the cues.\nANSWER: " + engine_answer)});
    }

    ip::RunConfig config(ip::AblationId a) const {
        ip::RunConfig cfg;
        cfg.ablation = a;
        cfg.num_policies = 3;
        cfg.oversample_factor = 2;
        cfg.profile_samples = 2;
        cfg.seed = 17;
        cfg.roles.intent_perceiver = kPerceiver;
        cfg.roles.policy_generator = kLm;
        cfg.roles.strategy_selector = kLm;
        cfg.roles.reasoning_engine = kEngine;
        return cfg;
    }

    double scripted_entropy(const std::string& sketch) const {
        for (std::size_t k = 0; k < sketch_texts.size(); ++k) {
            if (sketch_texts[k] == sketch) {
                double h = 0.0;
                for (double p : posteriors[k]) h -= p * std::log(p);
                return h;
            }
        }
        return INFINITY;
    }

    /// Position of the strictly lowest scripted entropy among `sketches`, or
    /// -1 when the minimum is shared.
    int expected_position(const std::vector<std::string>& sketches) const {
        int best = -1;
        double best_h = INFINITY;
        bool tied = false;
        for (std::size_t i = 0; i < sketches.size(); ++i) {
            const double h = scripted_entropy(sketches[i]);
            if (h < best_h - 1e-9) {
                best_h = h;
                best = static_cast<int>(i);
                tied = false;
            } else if (std::abs(h - best_h) <= 1e-9) {
                tied = true;
            }
        }
        return tied ? -1 : best;
    }

    std::size_t count_prompts(const std::string& backend, const std::string& marker) const {
        std::size_t n = 0;
        for (const auto& c : env.history(backend)) n += c.prompt.find(marker) != std::string::npos;
        return n;
    }

    std::size_t total_calls() const {
        return env.calls(kPerceiver) + env.calls(kLm) + env.calls(kEngine);
    }
};

}  // namespace testing_support
