#include <gtest/gtest.h>

#include <atomic>
#include <set>

#include "ripple/error.hpp"
#include "ripple/evalharness.hpp"
#include "ripple/simlab.hpp"
#include "test_support.hpp"

using namespace ripple;
using testing_support::TempDir;

namespace {

MCQItem make_item(const std::string& id, const std::string& target, const std::string& topic, std::size_t d,
                  int answer = 0) {
    MCQItem it;
    it.item_id = id;
    it.target_qid = target;
    it.topic = topic;
    it.semantic_distance = d;
    it.stem = "Which one about " + topic + "?";
    it.choices = {"w", "x", "y", "z"};
    it.answer_index = answer;
    return it;
}

RippleDataset dataset_of(std::vector<MCQItem> items) {
    RippleDataset ds;
    ds.dataset_id = "t";
    ds.items = std::move(items);
    ds.recompute_stats();
    return ds;
}

AnswerRecord rec(const std::string& id, bool correct, const std::string& provider = "p") {
    AnswerRecord r;
    r.item_id = id;
    r.provider_id = provider;
    r.chosen_index = correct ? 0 : 1;
    r.correct = correct;
    return r;
}

// Fails with TransportError for item ids in `failing`; counts calls.
class FlakyProvider final : public AnswerProvider {
public:
    FlakyProvider(std::set<std::string> failing) : failing_(std::move(failing)) {}
    const std::string& id() const override { return id_; }
    ProviderKind kind() const override { return ProviderKind::lookup_table; }
    std::string answer(const MCQItem& item, const std::string&) const override {
        ++calls;
        if (failing_.count(item.item_id)) throw TransportError("endpoint down");
        return "A";
    }
    mutable std::atomic<int> calls{0};

private:
    std::string id_ = "flaky";
    std::set<std::string> failing_;
};

RippleDataset ten_items() {
    std::vector<MCQItem> items;
    for (int i = 0; i < 10; ++i) items.push_back(make_item("i" + std::to_string(i), "t", "T" + std::to_string(i % 3), 1 + i % 2));
    return dataset_of(items);
}

}  // namespace

TEST(ParseAnswerLetter, Forms) {
    EXPECT_EQ(parse_answer_letter("B) because"), 1);
    EXPECT_EQ(parse_answer_letter("Answer: C"), 2);
    EXPECT_EQ(parse_answer_letter("  (d)"), 3);
    EXPECT_EQ(parse_answer_letter("\"A\""), 0);
    EXPECT_EQ(parse_answer_letter("[b]"), 1);
    EXPECT_FALSE(parse_answer_letter("Because it is"));
    EXPECT_FALSE(parse_answer_letter("a bacterium"));
    EXPECT_FALSE(parse_answer_letter(""));
    EXPECT_FALSE(parse_answer_letter("E"));
}

TEST(RenderAnswerPrompt, ContainsStemAndChoices) {
    auto p = render_answer_prompt(make_item("i", "t", "Anthrax", 1));
    EXPECT_NE(p.find("Which one about Anthrax?"), std::string::npos);
    for (const char* c : {"w", "x", "y", "z"}) EXPECT_NE(p.find(c), std::string::npos);
}

TEST(Evaluate, OracleScoresOne) {
    auto ds = ten_items();
    auto oracle = LookupTableProvider::oracle("oracle", ds);
    auto records = evaluate(oracle, ds);
    ASSERT_EQ(records.size(), 10u);
    for (const auto& r : records) EXPECT_TRUE(r.correct);
    EXPECT_EQ(utility(records, ds).overall.accuracy(), 1.0);
    EXPECT_TRUE(std::is_sorted(records.begin(), records.end(),
                               [](const AnswerRecord& a, const AnswerRecord& b) { return a.item_id < b.item_id; }));
}

TEST(Evaluate, LookupTableUnknownItemAbstains) {
    auto ds = ten_items();
    LookupTableProvider table("tbl", {{"i0", 0}, {"i1", 2}});
    auto records = evaluate(table, ds);
    EXPECT_TRUE(records[0].correct);
    EXPECT_FALSE(records[1].correct);
    EXPECT_EQ(records[1].chosen_index, 2);
    EXPECT_FALSE(records[2].chosen_index.has_value());
    EXPECT_FALSE(records[2].correct);
}

TEST(Evaluate, UniformRandomNearChance) {
    auto ds = sim::make_synthetic_dataset({1000, 50, 1, 100, 5, 0, "u"});
    ASSERT_EQ(ds.items.size(), 10000u);
    sim::UniformRandomProvider uniform("uniform", 17);
    auto records = evaluate(uniform, ds);
    EXPECT_NEAR(utility(records, ds).overall.accuracy(), 0.25, 0.02);
}

TEST(Evaluate, ParallelMatchesSerial) {
    auto ds = sim::make_synthetic_dataset({200, 10, 2, 4, 2, 0, "p"});
    sim::SimulatedProvider p("s", sim::DegradationProfile::step(0.8, 0.3, 50), 5);
    EvalOptions par;
    par.concurrency = 4;
    EXPECT_EQ(evaluate(p, ds), evaluate(p, ds, par));
}

TEST(Evaluate, ErrorsBecomeAbstainsUnderThreshold) {
    auto ds = ten_items();
    FlakyProvider p({"i3"});
    auto records = evaluate(p, ds);
    EXPECT_FALSE(records[3].chosen_index);
    EXPECT_FALSE(records[3].error.empty());
    EXPECT_TRUE(records[4].correct);
}

TEST(Evaluate, TooManyErrorsFailTheRun) {
    auto ds = ten_items();
    FlakyProvider p({"i1", "i2", "i3"});
    TempDir dir;
    EvalOptions opt;
    opt.records_path = dir / "r.jsonl";
    EXPECT_THROW(evaluate(p, ds, opt), RunFailedError);
    EXPECT_EQ(read_records(dir / "r.jsonl").size(), 10u);
}

TEST(Evaluate, ResumeAfterTornWrite) {
    auto ds = ten_items();
    TempDir dir;
    FlakyProvider full({});
    EvalOptions opt;
    opt.records_path = dir / "r.jsonl";
    auto expected = evaluate(full, ds, opt);
    const std::string complete = testing_support::read_file(dir / "r.jsonl");

    // Keep three whole lines plus half of the fourth.
    std::size_t cut = 0;
    for (int i = 0; i < 3; ++i) cut = complete.find('\n', cut) + 1;
    testing_support::write_file(dir / "r.jsonl", complete.substr(0, cut + 10));

    FlakyProvider resumed({});
    opt.resume = true;
    auto got = evaluate(resumed, ds, opt);
    EXPECT_EQ(resumed.calls.load(), 7);
    EXPECT_EQ(got, expected);
    EXPECT_EQ(testing_support::read_file(dir / "r.jsonl"), complete);
}

TEST(Records, JsonRoundTrip) {
    AnswerRecord r = rec("a", true);
    r.latency_ms = 12;
    AnswerRecord abstain;
    abstain.item_id = "b";
    abstain.provider_id = "p";
    abstain.error = "timeout";
    auto j = record_to_json(abstain);
    EXPECT_TRUE(j["chosen_index"].is_null());
    EXPECT_EQ(record_from_json(record_to_json(r)), r);
    EXPECT_EQ(record_from_json(j), abstain);
    EXPECT_EQ(record_to_json(r).dump(), R"({"item_id":"a","provider_id":"p","chosen_index":0,"correct":true,"latency_ms":12})");
}

TEST(Utility, HalfCorrectTopic) {
    auto ds = dataset_of({make_item("a", "t", "X", 1), make_item("b", "t", "X", 1)});
    auto u = utility({rec("a", true), rec("b", false)}, ds);
    EXPECT_EQ(u.per_topic.at("X").accuracy(), 0.5);
    EXPECT_EQ(u.provider_id, "p");
}

TEST(Utility, EmptyTable) {
    auto u = utility({}, ten_items());
    EXPECT_TRUE(u.per_topic.empty());
    EXPECT_EQ(u.overall.n_total, 0u);
    EXPECT_EQ(u.overall.accuracy(), 0.0);
}

TEST(Utility, OverallIsQuestionWeightedMeanOfTopics) {
    auto ds = ten_items();
    std::vector<AnswerRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(rec("i" + std::to_string(i), i % 4 != 0));
    auto u = utility(records, ds);
    double weighted = 0;
    std::size_t n = 0;
    for (const auto& [topic, t] : u.per_topic) {
        weighted += t.accuracy() * static_cast<double>(t.n_total);
        n += t.n_total;
    }
    EXPECT_EQ(n, 10u);
    EXPECT_NEAR(weighted / static_cast<double>(n), u.overall.accuracy(), 1e-12);
    EXPECT_DOUBLE_EQ(u.overall.accuracy(), 0.7);
}

TEST(Utility, IntegrityErrors) {
    auto ds = ten_items();
    EXPECT_THROW(utility({rec("nope", true)}, ds), IntegrityError);
    EXPECT_THROW(utility({rec("i0", true, "p"), rec("i1", true, "q")}, ds), IntegrityError);
}

TEST(KnowledgeDelta, Basics) {
    std::vector<MCQItem> items;
    std::vector<AnswerRecord> base, edited;
    for (int i = 0; i < 10; ++i) {
        std::string id = "x" + std::to_string(i);
        items.push_back(make_item(id, "t", "X", 1));
        base.push_back(rec(id, i < 8, "base"));
        edited.push_back(rec(id, i < 3, "edited"));
    }
    auto ds = dataset_of(items);
    auto ub = utility(base, ds), ue = utility(edited, ds);
    EXPECT_NEAR(knowledge_delta(ub, ue, "X"), 0.5, 1e-12);
    EXPECT_NEAR(knowledge_delta(ue, ub, "X"), -0.5, 1e-12);
    EXPECT_EQ(knowledge_delta(ub, ub, "X"), 0.0);
    EXPECT_THROW(knowledge_delta(ub, ue, "Y"), MissingConceptError);
}

TEST(RippleCurve, MeanOfTopicDeltasPerDistance) {
    auto ds = dataset_of({make_item("a1", "t", "A", 1), make_item("a2", "t", "A", 1), make_item("a3", "t", "A", 1),
                          make_item("a4", "t", "A", 1), make_item("a5", "t", "A", 1), make_item("b1", "t", "B", 1),
                          make_item("b2", "t", "B", 1), make_item("b3", "t", "B", 1), make_item("b4", "t", "B", 1),
                          make_item("b5", "t", "B", 1)});
    // A: 1.0 -> 0.8 (0.2); B: 1.0 -> 0.6 (0.4)
    std::vector<AnswerRecord> base, edited;
    for (const auto& it : ds.items) base.push_back(rec(it.item_id, true, "base"));
    for (const auto& it : ds.items)
        edited.push_back(rec(it.item_id, !(it.item_id == "a1" || it.item_id == "b1" || it.item_id == "b2"), "ed"));
    auto curve = ripple_curve(base, edited, ds);
    ASSERT_EQ(curve.points.size(), 1u);
    EXPECT_NEAR(curve.points[0].mean_delta, 0.3, 1e-12);
    EXPECT_EQ(curve.points[0].n_concepts, 2u);
    EXPECT_EQ(curve.points[0].n_questions, 10u);
    // sample sd of {0.2, 0.4} is 0.1414..; / sqrt(2) = 0.1
    EXPECT_NEAR(curve.points[0].stderr_, 0.1, 1e-12);
    EXPECT_EQ(curve.base_provider, "base");
}

TEST(RippleCurve, TopicReachedFromTwoTargetsCountsAtBothDistances) {
    auto ds = dataset_of({make_item("x@3", "T1", "X", 3), make_item("y@3", "T1", "Y", 3),
                          make_item("x@7", "T2", "X", 7)});
    std::vector<AnswerRecord> base = {rec("x@3", true, "b"), rec("x@7", true, "b"), rec("y@3", true, "b")};
    std::vector<AnswerRecord> edited = {rec("x@3", false, "e"), rec("x@7", false, "e"), rec("y@3", true, "e")};
    auto curve = ripple_curve(base, edited, ds);
    ASSERT_EQ(curve.points.size(), 2u);
    EXPECT_EQ(curve.points[0].distance, 3u);
    EXPECT_EQ(curve.points[1].distance, 7u);
    // X's delta is its pooled one (1.0), counted once at each distance.
    EXPECT_NEAR(curve.points[0].mean_delta, 0.5, 1e-12);
    EXPECT_EQ(curve.points[0].n_concepts, 2u);
    EXPECT_NEAR(curve.points[1].mean_delta, 1.0, 1e-12);
    EXPECT_EQ(curve.points[1].n_concepts, 1u);
}

TEST(RippleCurve, WidthBucketing) {
    Bucketing b = Bucketing::fixed(50);
    EXPECT_EQ(b.bucket_of(1), 1u);
    EXPECT_EQ(b.bucket_of(50), 1u);
    EXPECT_EQ(b.bucket_of(51), 51u);
    EXPECT_EQ(Bucketing::per_rank().bucket_of(37), 37u);
}

TEST(AccuracyCurve, PerDistance) {
    auto ds = ten_items();  // odd i at distance 2
    std::vector<AnswerRecord> r;
    for (int i = 0; i < 10; ++i) r.push_back(rec("i" + std::to_string(i), i % 2 == 0));
    auto pts = accuracy_curve(r, ds);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[0].accuracy, 1.0);
    EXPECT_EQ(pts[1].accuracy, 0.0);
    EXPECT_EQ(pts[1].n_questions, 5u);
}

TEST(CheckpointSweep, IdenticalProvidersGiveIdenticalRows) {
    auto ds = sim::make_synthetic_dataset({600, 50, 1, 10, 2, 0, "s"});
    sim::SimulatedProvider a("a", sim::DegradationProfile::step(0.8, 0.3, 50), 4);
    sim::SimulatedProvider b("b", sim::DegradationProfile::step(0.8, 0.3, 50), 4);
    sim::SimulatedProvider base("base", sim::DegradationProfile::constant(0.8), 4);
    auto rows = checkpoint_sweep(base, {&a, &b}, ds);
    ASSERT_EQ(rows.size(), 9u);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& ra = rows[3 + i];
        const auto& rb = rows[6 + i];
        EXPECT_EQ(ra.stage, 1u);
        EXPECT_EQ(rb.stage, 2u);
        EXPECT_EQ(ra.accuracy, rb.accuracy);
        EXPECT_EQ(ra.matched_distance, rb.matched_distance);
        EXPECT_EQ(ra.delta_vs_base, rb.delta_vs_base);
    }
    EXPECT_EQ(rows[0].stage, 0u);
    EXPECT_EQ(rows[0].delta_vs_base, 0.0);
    EXPECT_THROW(checkpoint_sweep(base, {&a}, ds), ArgumentError);
}

TEST(NearestDistance, TiesGoLow) {
    auto ds = dataset_of({make_item("a", "t", "A", 1), make_item("b", "t", "B", 51), make_item("c", "t", "C", 101)});
    EXPECT_EQ(nearest_distance(ds, 26), 1u);
    EXPECT_EQ(nearest_distance(ds, 27), 51u);
    EXPECT_EQ(nearest_distance(ds, 500), 101u);
}

TEST(Outputs, CsvAndDeterministicSvg) {
    RippleCurve c{"b", "e", {{1, 0.5, 2, 10, 0.1}, {6, 0.25, 2, 10, 0}, {11, 0, 2, 10, 0}}};
    EXPECT_EQ(curve_csv(c), "distance,mean_delta,n_concepts,n_questions,stderr\n1,0.5,2,10,0.1\n6,0.25,2,10,0\n"
                            "11,0,2,10,0\n");
    TempDir dir;
    emit_outputs(c, dir / "c.csv", dir / "c.svg");
    emit_outputs(c, dir / "c2.csv", dir / "c2.svg");
    EXPECT_EQ(testing_support::read_file(dir / "c.csv"), curve_csv(c));
    const auto svg = testing_support::read_file(dir / "c.svg");
    EXPECT_EQ(svg, testing_support::read_file(dir / "c2.svg"));
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.0), "0");
    EXPECT_EQ(format_double(-0.0), "0");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
