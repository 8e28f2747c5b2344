#include "mosaic/prompts.hpp"

#include "json.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

PromptBank build_prompts(const std::vector<std::string>& organs) {
    if (organs.empty()) throw EmptyInput("build_prompts: no organs");
    PromptBank bank;
    bank.organs = organs;
    bank.prompts.reserve(organs.size());
    for (const std::string& organ : organs) {
        if (organ.empty()) throw EmptyInput("build_prompts: empty organ name");
        std::vector<std::string> variants;
        variants.reserve(kPromptNouns.size() * kPromptVerbs.size());
        for (const char* noun : kPromptNouns)
            for (const char* verb : kPromptVerbs)
                variants.push_back(std::string("a CT ") + noun + " " + verb + " the " + organ);
        bank.prompts.push_back(std::move(variants));
    }
    return bank;
}

std::string prompt_bank_json(const PromptBank& bank) {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < bank.organs.size(); ++i) j[bank.organs[i]] = bank.prompts[i];
    return j.dump(2);
}

}  // namespace mosaic
