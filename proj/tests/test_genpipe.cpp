#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ripple/error.hpp"
#include "ripple/genpipe.hpp"
#include "ripple/simlab.hpp"
#include "test_support.hpp"

using namespace ripple;
using testing_support::TempDir;

namespace {

Document anthrax_doc() {
    std::string body =
        "Anthrax is an infection caused by the bacterium Bacillus anthracis. "
        "Infection typically occurs by contact with the skin, inhalation, or intestinal absorption. "
        "Symptom onset occurs between one day and more than two months after the infection is contracted. "
        "The skin form presents with a small blister with surrounding swelling. "
        "Anthrax spores can survive in soil for decades. "
        "Vaccines against anthrax exist for livestock and people.";
    return {"42", "Anthrax", body, body.size(), false};
}

MCQItem item(const std::string& topic, const std::string& stem, int n = 0) {
    MCQItem it;
    it.item_id = topic + "/" + std::to_string(n);
    it.target_qid = "q";
    it.topic = topic;
    it.semantic_distance = 1;
    it.stem = stem;
    it.choices = {"w", "x", "y", "z"};
    return it;
}

}  // namespace

TEST(ExtractTopic, CannedWorkedExample) {
    StubChatClient stub;
    const std::string q = "Which toxin component of the anthrax toxin binds the host cell receptor?";
    stub.add_canned(task::topic, q, "Bacillus anthracis");
    auto rec = extract_topic(stub, {"src-1", q, {}, "bio"});
    EXPECT_EQ(rec.topic, "Bacillus anthracis");
    EXPECT_EQ(rec.source_qids, std::vector<std::string>{"src-1"});
}

TEST(ExtractTopic, EmptyQuestionIsPrecondition) {
    StubChatClient stub;
    EXPECT_THROW(extract_topic(stub, {"q", "   ", {}, ""}), PreconditionError);
}

TEST(ExtractTopic, StubRulePrefersQuotedSpan) {
    StubChatClient stub;
    EXPECT_EQ(extract_topic(stub, {"q", "What is known about \"Yersinia pestis\"?", {}, ""}).topic, "Yersinia pestis");
    EXPECT_EQ(extract_topic(stub, {"q", "How does Bacillus Anthracis spread?", {}, ""}).topic, "Bacillus Anthracis");
}

TEST(ExtractTopics, OneEmptyReplyIsSkipped) {
    StubChatClient stub;
    std::vector<SourceQuestion> qs;
    for (int i = 0; i < 10; ++i)
        qs.push_back({"q" + std::to_string(i), "Tell me about \"Topic " + std::to_string(i) + "\".", {}, ""});
    stub.add_canned(task::topic, qs[4].text, "");
    auto batch = extract_topics(stub, qs);
    EXPECT_EQ(batch.records.size(), 9u);
    ASSERT_EQ(batch.skipped.size(), 1u);
    EXPECT_EQ(batch.skipped[0].key, "q4");
    EXPECT_EQ(batch.skipped[0].stage, "topic");
}

TEST(ExtractTopics, MergesSharedTopics) {
    StubChatClient stub;
    auto batch = extract_topics(stub, {{"a", "About \"X\"?", {}, ""}, {"b", "More on \"X\"?", {}, ""}});
    ASSERT_EQ(batch.records.size(), 1u);
    EXPECT_EQ(batch.records[0].source_qids, (std::vector<std::string>{"a", "b"}));
}

TEST(ExtractFacts, StubEchoesFirstSentences) {
    StubChatClient stub;
    auto facts = extract_facts(stub, anthrax_doc(), 3);
    ASSERT_EQ(facts.facts.size(), 3u);
    EXPECT_EQ(facts.facts[0], "Anthrax is an infection caused by the bacterium Bacillus anthracis.");
    EXPECT_EQ(facts.topic, "Anthrax");
}

TEST(ExtractFacts, EmptyBody) {
    StubChatClient stub;
    EXPECT_THROW(extract_facts(stub, {"1", "Empty", "", 0, false}, 3), PreconditionError);
}

TEST(ExtractFacts, GroundingFilter) {
    StubChatClient stub;
    stub.add_canned(task::facts, "Anthrax",
                    R"(["Anthrax spores survive in soil for decades.", "Quantum chromodynamics binds quarks tightly."])");
    auto facts = extract_facts(stub, anthrax_doc(), 10);
    ASSERT_EQ(facts.facts.size(), 1u);
    EXPECT_EQ(facts.facts[0], "Anthrax spores survive in soil for decades.");

    stub.add_canned(task::facts, "Anthrax", R"(["Quantum chromodynamics binds quarks tightly."])");
    EXPECT_THROW(extract_facts(stub, anthrax_doc(), 10), EmptyFactsError);
}

TEST(GenerateMcqs, StubProducesKValidItems) {
    StubChatClient stub;
    auto facts = extract_facts(stub, anthrax_doc(), 10);
    auto batch = generate_mcqs(stub, facts, 5, 1);
    ASSERT_EQ(batch.items.size(), 5u);
    EXPECT_TRUE(batch.rejected.empty());
    for (const auto& it : batch.items) {
        EXPECT_GE(it.answer_index, 0);
        EXPECT_LE(it.answer_index, 3);
        std::set<std::string> distinct(it.choices.begin(), it.choices.end());
        EXPECT_EQ(distinct.size(), 4u);
        EXPECT_EQ(it.provenance.generator_model, "stub-v1");
        EXPECT_EQ(it.provenance.repair_attempts, 0);
    }
}

TEST(GenerateMcqs, ThreeChoiceItemRejected) {
    StubChatClient stub;
    auto facts = extract_facts(stub, anthrax_doc(), 10);
    stub.add_canned(task::mcq, "Anthrax#0",
                    R"({"question":"What causes anthrax?","choices":["Bacillus","Virus","Prion"],"answer":0})");
    auto batch = generate_mcqs(stub, facts, 2, 1);
    EXPECT_EQ(batch.items.size(), 1u);
    ASSERT_EQ(batch.rejected.size(), 1u);
    EXPECT_EQ(batch.rejected[0].ordinal, 0u);
    EXPECT_NE(batch.rejected[0].reason.find("exactly 4 choices"), std::string::npos);
}

TEST(ParseMcqReply, LetterAnswersAndFences) {
    FactSet fs{"Anthrax", "42", {"Anthrax spores survive in soil."}, "stub-v1"};
    MCQItem out;
    auto err = parse_mcq_reply(
        "```json\n{\"question\":\"Where do anthrax spores survive?\",\"choices\":[\"Soil\",\"Air\",\"Ice\",\"Fire\"],"
        "\"answer\":\"c\"}\n```",
        fs, out);
    ASSERT_FALSE(err) << *err;
    EXPECT_EQ(out.answer_index, 2);
    EXPECT_TRUE(parse_mcq_reply(R"({"question":"Who won the cup final?","choices":["a","b","c","d"],"answer":0})",
                                fs, out));
    EXPECT_TRUE(parse_mcq_reply(R"({"question":"Anthrax soil?","choices":["a","a","c","d"],"answer":0})", fs, out));
    EXPECT_TRUE(parse_mcq_reply(R"({"question":"Anthrax soil?","choices":["a","b","c","d"],"answer":4})", fs, out));
    EXPECT_TRUE(parse_mcq_reply("not json", fs, out));
}

TEST(GenerateMcqs, AnswerSlotsUniformOverSeeds) {
    StubChatClient stub;
    auto facts = extract_facts(stub, anthrax_doc(), 10);
    std::array<int, 4> counts{};
    int total = 0;
    for (std::uint64_t seed = 0; seed < 80; ++seed)
        for (const auto& it : generate_mcqs(stub, facts, 5, seed).items) {
            ++counts[static_cast<std::size_t>(it.answer_index)];
            ++total;
        }
    ASSERT_EQ(total, 400);
    for (int c : counts) EXPECT_NEAR(c / 400.0, 0.25, 0.05);
}

TEST(RefusalFilter, RefusalStemRemovesWholeTopic) {
    std::vector<MCQItem> items = {item("Bioweapon", "I cannot provide details about bioweapons", 0),
                                  item("Bioweapon", "Which agent is described?", 1),
                                  item("Vaccine", "Which vaccine is used for anthrax?", 0)};
    auto r = refusal_filter(default_refusal_patterns(), items, {});
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].topic, "Vaccine");
    ASSERT_EQ(r.removed.size(), 1u);
    EXPECT_EQ(r.removed[0].topic, "Bioweapon");
    EXPECT_EQ(r.removed[0].pattern, "I cannot provide");
    EXPECT_EQ(r.removed[0].n_items, 2u);
}

TEST(RefusalFilter, CleanItemsKept) {
    std::vector<MCQItem> items = {item("A", "Which is true about A?"), item("B", "Which is true about B?")};
    auto r = refusal_filter(default_refusal_patterns(), items, {});
    EXPECT_EQ(r.kept.size(), 2u);
    EXPECT_TRUE(r.removed.empty());
}

TEST(RefusalFilter, OneOfTenTopicsViaFactText) {
    std::vector<MCQItem> items;
    std::map<std::string, std::string> texts;
    for (int i = 0; i < 10; ++i) {
        std::string t = "Topic" + std::to_string(i);
        items.push_back(item(t, "Question on " + t + "?"));
        texts[t] = "A plain fact about " + t + ".";
    }
    texts["Topic7"] = "As an AI language model I won't answer.";
    auto r = refusal_filter(default_refusal_patterns(), items, texts);
    EXPECT_EQ(r.kept.size(), 9u);
    ASSERT_EQ(r.removed.size(), 1u);
    EXPECT_EQ(r.removed[0].topic, "Topic7");
    EXPECT_EQ(r.removed[0].pattern, "as an AI");
}

namespace {

struct SmallBuild {
    Corpus corpus = sim::make_planted_corpus({2, 5, 0.6, 9, 64, 60});
    VectorIndex index = build_index(corpus, EmbedderConfig{});
    std::vector<SourceQuestion> sources;
    BuildConfig config;

    SmallBuild() {
        sources = {{"s1", "What is known about \"" + corpus.documents()[0].title + "\"?", {}, ""},
                   {"s2", "What is known about \"" + corpus.documents()[6].title + "\"?", {}, ""}};
        config.n_retrieve = 6;
        config.rank_step = 1;
        config.k = 2;
    }
};

}  // namespace

TEST(BuildDataset, SmallStubBuildIsDeterministicAndValid) {
    SmallBuild b;
    StubChatClient stub;
    auto d1 = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 7);
    auto d2 = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 7);
    EXPECT_LE(d1.items.size(), 2u * 6u * 2u);
    EXPECT_GT(d1.items.size(), 0u);
    const std::string bytes = serialize_dataset_jsonl(d1);
    EXPECT_EQ(bytes, serialize_dataset_jsonl(d2));
    std::istringstream lines(bytes);
    std::string line;
    while (std::getline(lines, line)) {
        auto err = validate_item_json(nlohmann::json::parse(line));
        EXPECT_FALSE(err) << *err;
    }
    ASSERT_EQ(d1.targets.size(), 2u);
    EXPECT_EQ(d1.targets[0].resolution, TopicResolution::matched_title);
    for (const auto& it : d1.items) EXPECT_TRUE(it.semantic_distance >= 1 && it.semantic_distance <= 6);
}

TEST(BuildDataset, ParallelBuildMatchesSerial) {
    SmallBuild b;
    StubChatClient stub;
    auto serial = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 3);
    b.config.parallelism = 4;
    auto parallel = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 3);
    EXPECT_EQ(serialize_dataset_jsonl(serial), serialize_dataset_jsonl(parallel));
}

TEST(BuildDataset, DifferentSeedShufflesDifferently) {
    SmallBuild b;
    StubChatClient stub;
    auto a = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 1);
    auto c = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 2);
    EXPECT_NE(serialize_dataset_jsonl(a), serialize_dataset_jsonl(c));
}

TEST(DatasetIo, RoundTripAndErrors) {
    SmallBuild b;
    StubChatClient stub;
    auto ds = build_dataset(b.corpus, b.index, b.sources, b.config, stub, 7);
    TempDir dir;
    write_dataset(ds, dir / "d.jsonl");
    auto back = read_dataset(dir / "d.jsonl");
    EXPECT_EQ(serialize_dataset_jsonl(back), serialize_dataset_jsonl(ds));
    EXPECT_EQ(back.targets.size(), ds.targets.size());
    EXPECT_EQ(nlohmann::json(back.config), nlohmann::json(ds.config));

    std::string text = testing_support::read_file(dir / "d.jsonl");
    std::string first = text.substr(0, text.find('\n') + 1);
    testing_support::write_file(dir / "dup.jsonl", first + first);
    EXPECT_THROW(read_dataset(dir / "dup.jsonl"), DuplicateError);
    testing_support::write_file(dir / "bad.jsonl", first + R"({"item_id":"x"})" "\n");
    try {
        read_dataset(dir / "bad.jsonl");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}
