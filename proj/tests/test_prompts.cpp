#include <regex>

#include "doctest.h"
#include "mosaic/prompts.hpp"
#include "mosaic/volume.hpp"

using namespace mosaic;

namespace {

std::vector<std::string> btcv_names() {
    std::vector<std::string> names;
    for (const auto& [id, name] : btcv_organ_table())
        if (id > 0) names.push_back(name);
    return names;
}

}  // namespace

TEST_CASE("noun-major enumeration puts 'a CT slice showing the spleen' first") {
    PromptBank bank = build_prompts({"spleen"});
    REQUIRE(bank.prompts.size() == 1);
    REQUIRE(bank.prompts[0].size() == 16);
    CHECK(bank.prompts[0][0] == "a CT slice showing the spleen");
    CHECK(bank.prompts[0][1] == "a CT slice depicting the spleen");
    CHECK(bank.prompts[0][4] == "a CT scan showing the spleen");
}

TEST_CASE("13 BTCV organs yield 208 prompts") {
    PromptBank bank = build_prompts(btcv_names());
    std::size_t total = 0;
    for (const auto& p : bank.prompts) {
        CHECK(p.size() == 16);
        total += p.size();
    }
    CHECK(total == 208);
}

TEST_CASE("the liver bank contains 'a CT image containing the liver'") {
    PromptBank bank = build_prompts({"liver"});
    bool found = false;
    for (const auto& p : bank.prompts[0]) found |= p == "a CT image containing the liver";
    CHECK(found);
}

TEST_CASE("every prompt matches the template") {
    std::regex pattern(
        "a CT (slice|scan|image|view) (showing|depicting|highlighting|containing) the .+");
    PromptBank bank = build_prompts(btcv_names());
    for (const auto& organ_prompts : bank.prompts)
        for (const auto& p : organ_prompts) CHECK(std::regex_match(p, pattern));
}

TEST_CASE("multi-word organ names substitute verbatim") {
    PromptBank bank = build_prompts({"inferior vena cava"});
    CHECK(bank.prompts[0][0] == "a CT slice showing the inferior vena cava");
}

TEST_CASE("generation is order-stable") {
    PromptBank a = build_prompts(btcv_names());
    PromptBank b = build_prompts(btcv_names());
    CHECK(a.prompts == b.prompts);
    CHECK(a.organs == b.organs);
}

TEST_CASE("an empty organ list is rejected") {
    CHECK_THROWS_AS(build_prompts({}), EmptyInput);
    CHECK_THROWS_AS(build_prompts({""}), EmptyInput);
}

TEST_CASE("json emission keys by organ") {
    std::string j = prompt_bank_json(build_prompts({"spleen", "liver"}));
    CHECK(j.find("\"spleen\"") != std::string::npos);
    CHECK(j.find("a CT view containing the liver") != std::string::npos);
}
