#include <doctest.h>

#include "framepipe/errors.hpp"
#include "framepipe/trace.hpp"

using namespace framepipe;

TEST_CASE("persistence with q=0 never switches") {
    TraceSpec spec;
    spec.alphabet = {"w", "a", "s", "d"};
    spec.length = 200;
    spec.switch_prob = 0.0;
    ActionTrace t = gen_trace(spec, 11);
    REQUIRE(t.size() == 200);
    for (const auto& r : t.records) CHECK(r.action == "w");
}

TEST_CASE("persistence with q=1 switches every frame") {
    TraceSpec spec;
    spec.alphabet = {"a", "b"};
    spec.length = 500;
    spec.switch_prob = 1.0;
    ActionTrace t = gen_trace(spec, 3);
    for (std::size_t i = 1; i < t.size(); ++i) {
        CHECK(t.records[i].action != t.records[i - 1].action);
    }
}

TEST_CASE("persistence switch rate concentrates around q") {
    TraceSpec spec;
    spec.alphabet = {"w", "a", "s", "d"};
    spec.length = 100000;
    spec.switch_prob = 0.07;
    ActionTrace t = gen_trace(spec, 1);
    long long switches = 0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t.records[i].action != t.records[i - 1].action) ++switches;
    }
    double rate = static_cast<double>(switches) / static_cast<double>(t.size() - 1);
    CHECK(rate > 0.065);
    CHECK(rate < 0.075);
}

TEST_CASE("uniform and scripted models") {
    TraceSpec spec;
    spec.alphabet = {"x", "y", "z"};
    spec.length = 3000;
    spec.model = TraceModel::uniform;
    ActionTrace t = gen_trace(spec, 5);
    long long seen_x = 0;
    for (const auto& r : t.records) {
        if (r.action == "x") ++seen_x;
    }
    CHECK(seen_x > 800);
    CHECK(seen_x < 1200);

    spec.model = TraceModel::scripted;
    spec.pattern = {"x", "y"};
    spec.length = 5;
    ActionTrace s = gen_trace(spec, 0);
    CHECK(s.actions() == std::vector<std::string>{"x", "y", "x", "y", "x"});
}

TEST_CASE("timestamps follow the configured interval") {
    TraceSpec spec;
    spec.alphabet = {"w"};
    spec.length = 4;
    spec.interval_ms = 37.9;
    ActionTrace t = gen_trace(spec, 0);
    CHECK(t.records[0].t_ms == 0.0);
    CHECK(t.records[3].t_ms == doctest::Approx(3 * 37.9).epsilon(1e-12));
    t.validate();
}

TEST_CASE("spec validation") {
    TraceSpec spec;
    spec.alphabet = {"a", "a"};
    spec.length = 5;
    CHECK_THROWS_AS(gen_trace(spec, 0), ConfigError);
    spec.alphabet = {"a"};
    spec.length = 0;
    CHECK_THROWS_AS(gen_trace(spec, 0), ConfigError);
    spec.length = 5;
    spec.switch_prob = 1.5;
    CHECK_THROWS_AS(gen_trace(spec, 0), ConfigError);
    spec.switch_prob = 0.0;
    spec.model = TraceModel::scripted;
    CHECK_THROWS_AS(gen_trace(spec, 0), ConfigError);  // no pattern
}

TEST_CASE("fixed seed reproduces the byte stream; different seeds diverge") {
    TraceSpec spec;
    spec.alphabet = {"w", "a", "s", "d"};
    spec.length = 1000;
    spec.switch_prob = 0.3;
    std::string a = to_jsonl(gen_trace(spec, 42));
    std::string b = to_jsonl(gen_trace(spec, 42));
    std::string c = to_jsonl(gen_trace(spec, 43));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("JSONL round trip") {
    TraceSpec spec;
    spec.alphabet = {"w", "a"};
    spec.length = 50;
    spec.switch_prob = 0.5;
    spec.interval_ms = 16.7;
    ActionTrace t = gen_trace(spec, 7);
    ActionTrace back = parse_jsonl(to_jsonl(t), "<inline>");
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(back.records[i].action == t.records[i].action);
        CHECK(back.records[i].t_ms == t.records[i].t_ms);
    }
}

TEST_CASE("JSONL parse errors carry the line number") {
    CHECK_THROWS_WITH_AS(
        parse_jsonl("{\"t_ms\": 0, \"action\": \"w\"}\n{\"t_ms\": 1}\n", "t.jsonl"),
        doctest::Contains("t.jsonl:2"), ConfigError);
    CHECK_THROWS_AS(parse_jsonl("{\"t_ms\": 0, \"t_ms\": 1, \"action\": \"w\"}\n", "x"),
                    ConfigError);
    CHECK_THROWS_AS(parse_jsonl("{\"t_ms\": 0, \"action\": \"w\", \"extra\": 1}\n", "x"),
                    ConfigError);
}

TEST_CASE("trace validation rejects time travel") {
    ActionTrace t;
    t.records = {{10.0, "w"}, {5.0, "a"}};
    CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("alphabet is sorted and distinct") {
    ActionTrace t;
    t.records = {{0, "s"}, {1, "a"}, {2, "s"}, {3, "w"}};
    CHECK(t.alphabet() == std::vector<std::string>{"a", "s", "w"});
}
