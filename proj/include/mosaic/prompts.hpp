#pragma once

#include <array>
#include <string>
#include <vector>

namespace mosaic {

// "a CT <noun> <verb> the <organ>" over 4 nouns x 4 verbs.
inline constexpr std::array<const char*, 4> kPromptNouns = {"slice", "scan", "image", "view"};
inline constexpr std::array<const char*, 4> kPromptVerbs = {"showing", "depicting", "highlighting",
                                                            "containing"};

struct PromptBank {
    std::vector<std::string> organs;                   // insertion order preserved
    std::vector<std::vector<std::string>> prompts;     // 16 per organ, noun-major
};

PromptBank build_prompts(const std::vector<std::string>& organs);

std::string prompt_bank_json(const PromptBank& bank);

}  // namespace mosaic
