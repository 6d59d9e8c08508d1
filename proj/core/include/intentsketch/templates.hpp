#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "intentsketch/types.hpp"

namespace intentsketch {

/// Prompt templates for every stage. Placeholders are `{name}`; section
/// placeholders ({intent}, {sketch}, {conditioning}, {media_note}) expand to
/// a headed block or to nothing when their value is absent.
struct PromptBundle {
    std::string perceiver_template;
    std::string generator_template;
    std::string restate_template;
    std::string selector_template;
    std::string reasoner_template;
    std::string repair_template;
    std::string judge_template;

    static PromptBundle defaults();

    /// Overrides defaults with `<dir>/<stage>.txt` for each file present
    /// (perceiver, generator, restate, selector, reasoner, repair, judge).
    static PromptBundle load(const std::filesystem::path& dir);

    /// Error{InvalidTemplate} when a template uses an unknown placeholder or
    /// misses one its stage needs.
    void validate() const;
};

/// Placeholders a stage template may reference.
const std::set<std::string>& allowed_placeholders(std::string_view stage);

/// Placeholder names used in a template, in order of first use.
std::set<std::string> placeholders_in(std::string_view tmpl);

/// Substitutes every `{name}` from `values`; unknown names are an error.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Section renderers shared by all stages.
std::string render_options(const OmniInput& x);
std::string render_media_note(const OmniInput& x);
std::string render_intent_section(std::string_view intent);
std::string render_sketch_section(std::string_view sketch);
std::string render_conditioning_section(std::string_view conditioning);

inline constexpr std::string_view kIntentSectionHeader = "Intent summary:";

}  // namespace intentsketch
