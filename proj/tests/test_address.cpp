#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcp2osc/address.hpp"
#include "mcp2osc/error.hpp"

#include "support/brute_match.hpp"
#include "support/generators.hpp"

#include <set>

using namespace mcp2osc;

TEST_CASE("validate_address classification")
{
    CHECK(validate_address("/audio/player/volume").concrete());
    CHECK(validate_address("/a").concrete());
    CHECK(validate_address("/ch/*/mute").pattern());
    CHECK(validate_address("/ch/?/mute").pattern());
    CHECK(validate_address("/a[12]").pattern());
    CHECK(validate_address("/{audio,video}/gain").pattern());

    CHECK(validate_address("volume").invalid());
    CHECK(validate_address("").invalid());
    CHECK(validate_address("/a b").invalid());
    CHECK(validate_address("/a\tb").invalid());
    CHECK(validate_address("/a,b").invalid());  // ',' only allowed inside braces
    CHECK(validate_address("/a#b").invalid());
    CHECK(!validate_address("volume").reason.empty());
}

TEST_CASE("match: spec examples")
{
    CHECK(match("/ch/*/mute", "/ch/3/mute"));
    CHECK_FALSE(match("/ch/*", "/ch/3/mute")); // '*' never crosses '/'
    CHECK(match("/{audio,video}/gain", "/audio/gain"));
    CHECK(match("/x", "/x"));
    CHECK_FALSE(match("/x", "/y"));
    CHECK(match("/ch/?/mute", "/ch/3/mute"));
    CHECK_FALSE(match("/ch/?/mute", "/ch/33/mute"));
    CHECK(match("/ch/[0-9]/mute", "/ch/3/mute"));
    CHECK_FALSE(match("/ch/[!0-9]/mute", "/ch/3/mute"));
    CHECK(match("/ch/[!0-9]/mute", "/ch/x/mute"));
    CHECK(match("/a/*", "/a/"));
    CHECK_FALSE(match("/a/?", "/a/"));
}

TEST_CASE("malformed patterns throw")
{
    for (const char* p : {"/a[b", "/a{b", "/a{}/c", "/a}b", "/a{b,{c}}"}) {
        CHECK_THROWS_AS((void)AddressPattern::parse(p), Error);
        CHECK_THROWS_AS((void)match(p, "/ab"), Error);
    }
}

namespace {

std::string random_valid_pattern(gen::Rng& rng)
{
    static const char lits[] = "ab123";
    auto lit = [&] { return lits[gen::pick(rng, 0, 4)]; };
    int segments = gen::pick(rng, 1, 3);
    std::string p;
    for (int s = 0; s < segments; ++s) {
        p += '/';
        int tokens = gen::pick(rng, 0, 3);
        for (int t = 0; t < tokens; ++t) {
            switch (gen::pick(rng, 0, 5)) {
            case 0: p += '?'; break;
            case 1: p += '*'; break;
            case 2: { // char class
                p += '[';
                if (gen::pick(rng, 0, 3) == 0)
                    p += '!';
                int n = gen::pick(rng, 1, 3);
                for (int i = 0; i < n; ++i) {
                    if (gen::pick(rng, 0, 2) == 0) {
                        p += '1';
                        p += '-';
                        p += '3';
                    } else {
                        p += lit();
                    }
                }
                p += ']';
                break;
            }
            case 3: { // alternation; "{}" itself is malformed, so keep >= 1 char
                p += '{';
                int n = gen::pick(rng, 1, 3);
                for (int i = 0; i < n; ++i) {
                    if (i)
                        p += ',';
                    int len = gen::pick(rng, n == 1 ? 1 : 0, 2);
                    for (int k = 0; k < len; ++k)
                        p += lit();
                }
                p += '}';
                break;
            }
            default: p += lit(); break;
            }
        }
    }
    return p;
}

std::string random_small_address(gen::Rng& rng)
{
    static const char lits[] = "ab123";
    int segments = gen::pick(rng, 1, 3);
    std::string a;
    for (int s = 0; s < segments; ++s) {
        a += '/';
        int len = gen::pick(rng, 0, 4);
        for (int i = 0; i < len; ++i)
            a += lits[gen::pick(rng, 0, 4)];
    }
    return a;
}

} // namespace

TEST_CASE("match agrees with the brute-force oracle on a full cross product")
{
    gen::Rng rng(424242);
    std::vector<std::string> patterns;
    for (int i = 0; i < 60; ++i)
        patterns.push_back(random_valid_pattern(rng));
    std::vector<std::string> addresses;
    for (int i = 0; i < 220; ++i)
        addresses.push_back(random_small_address(rng));

    std::size_t checked = 0;
    for (const auto& p : patterns) {
        auto parsed = AddressPattern::parse(p);
        for (const auto& a : addresses) {
            auto expected = brute::match(p, a);
            REQUIRE_MESSAGE(expected.has_value(), "oracle rejected generated pattern ", p);
            bool got = match(parsed, a);
            CHECK_MESSAGE(got == *expected, "pattern '", p, "' vs '", a, "'");
            ++checked;
        }
    }
    CHECK(checked >= 50 * 200);
}

TEST_CASE("literal pattern matches exactly itself")
{
    gen::Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        auto a = random_small_address(rng);
        auto b = random_small_address(rng);
        CHECK(match(a, a));
        CHECK(match(a, b) == (a == b));
    }
}

TEST_CASE("expand_template: odd channels of a 100-channel system")
{
    TemplateSpec spec;
    spec.address_template = "/ch/[channel]/mute";
    spec.ranges["channel"] = {1, 100, 1};
    spec.filter = TemplateSpec::Filter::Odd;
    spec.args.push_back(TemplateSpec::Arg::lit(std::int32_t{1}));

    auto msgs = expand_template(spec);
    REQUIRE(msgs.size() == 50);
    CHECK(msgs.front().address == "/ch/1/mute");
    CHECK(msgs.back().address == "/ch/99/mute");
    for (const auto& m : msgs) {
        CHECK(validate_address(m.address).concrete());
        REQUIRE(m.args.size() == 1);
        CHECK(std::get<std::int32_t>(m.args[0]) == 1);
    }
}

TEST_CASE("expand_template: singleton and multi-placeholder order")
{
    TemplateSpec single;
    single.address_template = "/a/[i]";
    single.ranges["i"] = {5, 5, 1};
    auto msgs = expand_template(single);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].address == "/a/5");

    TemplateSpec grid;
    grid.address_template = "/m/[i]/[j]";
    grid.ranges["i"] = {1, 2, 1};
    grid.ranges["j"] = {1, 2, 1};
    msgs = expand_template(grid);
    REQUIRE(msgs.size() == 4);
    CHECK(msgs[0].address == "/m/1/1");
    CHECK(msgs[1].address == "/m/1/2");
    CHECK(msgs[2].address == "/m/2/1");
    CHECK(msgs[3].address == "/m/2/2");
}

TEST_CASE("expand_template: placeholders in arguments")
{
    TemplateSpec spec;
    spec.address_template = "/led/[n]";
    spec.ranges["n"] = {1, 3, 1};
    spec.args.push_back(TemplateSpec::Arg::int_placeholder("n"));
    spec.args.push_back(TemplateSpec::Arg::str_template("led-[n]"));

    auto msgs = expand_template(spec);
    REQUIRE(msgs.size() == 3);
    CHECK(std::get<std::int32_t>(msgs[1].args[0]) == 2);
    CHECK(std::get<std::string>(msgs[2].args[1]) == "led-3");
}

TEST_CASE("expand_template errors")
{
    TemplateSpec unbound;
    unbound.address_template = "/a/[missing]";
    CHECK_THROWS_AS((void)expand_template(unbound), Error);
    try {
        (void)expand_template(unbound);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnboundPlaceholder);
    }

    TemplateSpec huge;
    huge.address_template = "/a/[i]/[j]";
    huge.ranges["i"] = {1, 1000, 1};
    huge.ranges["j"] = {1, 1000, 1};
    try {
        (void)expand_template(huge);
        FAIL("expected CardinalityExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CardinalityExceeded);
    }
}

TEST_CASE("expand_template cardinality equals independently computed product")
{
    gen::Rng rng(7777);
    for (int trial = 0; trial < 50; ++trial) {
        TemplateSpec spec;
        int n_placeholders = gen::pick(rng, 1, 3);
        spec.address_template = "/x";
        std::vector<std::string> names;
        for (int p = 0; p < n_placeholders; ++p) {
            std::string name(1, char('i' + p));
            names.push_back(name);
            spec.address_template += "/[" + name + "]";
            int start = gen::pick(rng, -5, 5);
            int len = gen::pick(rng, 0, 12);
            int step = gen::pick(rng, 1, 3);
            spec.ranges[name] = {start, start + len, step};
        }
        int f = gen::pick(rng, 0, 2);
        spec.filter = f == 0   ? TemplateSpec::Filter::None
                      : f == 1 ? TemplateSpec::Filter::Odd
                               : TemplateSpec::Filter::Even;

        // independent count: enumerate each range by hand
        std::size_t product = 1;
        for (const auto& name : names) {
            auto r = spec.ranges[name];
            std::size_t n = 0;
            for (int v = r.start; v <= r.end; v += r.step) {
                bool odd = v % 2 != 0;
                if (spec.filter == TemplateSpec::Filter::Odd && !odd)
                    continue;
                if (spec.filter == TemplateSpec::Filter::Even && odd)
                    continue;
                ++n;
            }
            product *= n;
        }
        auto msgs = expand_template(spec);
        CHECK(msgs.size() == product);
        std::set<std::string> unique;
        for (const auto& m : msgs) {
            CHECK(validate_address(m.address).concrete());
            unique.insert(m.address);
        }
        CHECK(unique.size() == msgs.size());
    }
}
