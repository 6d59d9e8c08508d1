#include "intentsketch/templates.hpp"

#include <fstream>
#include <sstream>

namespace intentsketch {

PromptBundle PromptBundle::defaults() {
    PromptBundle b;
    b.perceiver_template =
        "You are an intent perceiver for audio-visual question answering.\n"
        "Study the media and the question. In two to four sentences, describe what the asker "
        "actually wants to find out and which visual, audio, or temporal cues matter for it. "
        "Do not answer the question.\n\n"
        "{media_note}Question: {query}\n{options}\nIntent:";
    b.generator_template =
        "You are a policy provider. Write one short strategy sketch (three to five steps) for "
        "reasoning about the question below.\n"
        "Emphasis: {emphasis}.\n"
        "Describe how to reason. Do not state, hint at, or rule in any final answer.\n\n"
        "{media_note}{intent}Question: {query}\n{options}\nStrategy sketch:";
    b.restate_template =
        "Restate the reasoning strategy below in one sentence that keeps its core approach.\n\n"
        "{sketch}Restatement:";
    b.selector_template =
        "You are a strategy evaluator. Apply the strategy to the question and reply with only the "
        "label of the most likely option.\n\n"
        "{media_note}{intent}{conditioning}{sketch}Question: {query}\n{options}\nAnswer label:";
    b.reasoner_template =
        "{media_note}{intent}{conditioning}{sketch}Question: {query}\n{options}\n"
        "Reason step by step, following the strategy when one is given. "
        "End with a final line of the form \"ANSWER: <label>\".";
    b.repair_template =
        "{media_note}Question: {query}\n{options}\n"
        "Your previous reply did not end with a final answer line:\n{previous}\n\n"
        "Reply with exactly one line of the form \"ANSWER: <label>\".";
    b.judge_template =
        "Do the two reasoning strategies below describe the same line of reasoning?\n"
        "Reply with exactly one word: yes or no.\n\n"
        "Strategy 1:\n{a}\n\nStrategy 2:\n{b}\n\nVerdict:";
    return b;
}

PromptBundle PromptBundle::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::ConfigError, "template directory not found: " + dir.string());
    }
    PromptBundle b = defaults();
    const std::pair<const char*, std::string*> files[] = {
        {"perceiver", &b.perceiver_template}, {"generator", &b.generator_template},
        {"restate", &b.restate_template},     {"selector", &b.selector_template},
        {"reasoner", &b.reasoner_template},   {"repair", &b.repair_template},
        {"judge", &b.judge_template},
    };
    for (const auto& [stage, slot] : files) {
        const auto path = dir / (std::string(stage) + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in) continue;
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        *slot = std::move(text);
    }
    b.validate();
    return b;
}

const std::set<std::string>& allowed_placeholders(std::string_view stage) {
    static const std::map<std::string, std::set<std::string>, std::less<>> table{
        {"perceiver", {"query", "options", "media_note", "conditioning"}},
        {"generator", {"query", "options", "media_note", "intent", "emphasis", "conditioning"}},
        {"restate", {"sketch", "query"}},
        {"selector", {"query", "options", "media_note", "intent", "sketch", "conditioning"}},
        {"reasoner", {"query", "options", "media_note", "intent", "sketch", "conditioning"}},
        {"repair", {"query", "options", "media_note", "previous"}},
        {"judge", {"a", "b"}},
    };
    auto it = table.find(stage);
    if (it == table.end()) throw Error(ErrorCode::InvalidTemplate, "unknown stage " + std::string(stage));
    return it->second;
}

std::set<std::string> placeholders_in(std::string_view tmpl) {
    std::set<std::string> out;
    for (std::size_t pos = 0; (pos = tmpl.find('{', pos)) != std::string_view::npos;) {
        const auto end = tmpl.find('}', pos + 1);
        if (end == std::string_view::npos) break;
        const auto name = tmpl.substr(pos + 1, end - pos - 1);
        bool ident = !name.empty();
        for (char c : name) ident = ident && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
        if (ident) out.emplace(name);
        pos = ident ? end + 1 : pos + 1;
    }
    return out;
}

void PromptBundle::validate() const {
    const std::pair<const char*, const std::string*> stages[] = {
        {"perceiver", &perceiver_template}, {"generator", &generator_template},
        {"restate", &restate_template},     {"selector", &selector_template},
        {"reasoner", &reasoner_template},   {"repair", &repair_template},
        {"judge", &judge_template},
    };
    for (const auto& [stage, tmpl] : stages) {
        const auto& allowed = allowed_placeholders(stage);
        const auto used = placeholders_in(*tmpl);
        for (const auto& name : used) {
            if (!allowed.contains(name)) {
                throw Error(ErrorCode::InvalidTemplate,
                            std::string(stage) + " template uses unknown placeholder {" + name + "}");
            }
        }
        if (std::string_view(stage) != "judge" && std::string_view(stage) != "restate" && !used.contains("query")) {
            throw Error(ErrorCode::InvalidTemplate, std::string(stage) + " template lacks {query}");
        }
    }
    auto require = [](const char* stage, const std::string& tmpl, const char* name) {
        if (!placeholders_in(tmpl).contains(name)) {
            throw Error(ErrorCode::InvalidTemplate, std::string(stage) + " template lacks {" + name + "}");
        }
    };
    require("restate", restate_template, "sketch");
    require("selector", selector_template, "sketch");
    require("reasoner", reasoner_template, "sketch");
    require("repair", repair_template, "previous");
    require("judge", judge_template, "a");
    require("judge", judge_template, "b");
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find('}', open + 1);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const std::string name(tmpl.substr(open + 1, close - open - 1));
        bool ident = !name.empty();
        for (char c : name) ident = ident && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
        if (!ident) {
            out.append(tmpl.substr(pos, open + 1 - pos));
            pos = open + 1;
            continue;
        }
        auto it = values.find(name);
        if (it == values.end()) {
            throw Error(ErrorCode::InvalidTemplate, "no value for placeholder {" + name + "}");
        }
        out.append(tmpl.substr(pos, open - pos));
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

std::string render_options(const OmniInput& x) {
    if (x.options.empty()) return "Answer in free form.\n";
    std::string out = "Options:\n";
    for (const auto& o : x.options) out += o.label + ". " + o.text + "\n";
    return out;
}

std::string render_media_note(const OmniInput& x) {
    if (!x.video && !x.audio) return {};
    std::string out = "Media:";
    if (x.video) out += " video <" + *x.video + ">";
    if (x.audio) out += std::string(x.video ? "," : "") + " audio <" + *x.audio + ">";
    return out + "\n\n";
}

std::string render_intent_section(std::string_view intent) {
    if (intent.empty()) return {};
    return std::string(kIntentSectionHeader) + "\n" + std::string(intent) + "\n\n";
}

std::string render_sketch_section(std::string_view sketch) {
    if (sketch.empty()) return {};
    return "Strategy:\n" + std::string(sketch) + "\n\n";
}

std::string render_conditioning_section(std::string_view conditioning) {
    if (conditioning.empty()) return {};
    return "Constraints:\n" + std::string(conditioning) + "\n\n";
}

}  // namespace intentsketch
