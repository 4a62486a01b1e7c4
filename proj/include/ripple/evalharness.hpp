#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ripple/chat.hpp"
#include "ripple/genpipe.hpp"

namespace ripple {

enum class ProviderKind { remote_chat, lookup_table, simulated };

/// A model under evaluation. The harness only sees reply text, so remote,
/// table and simulated providers are interchangeable. Must be thread-safe.
class AnswerProvider {
public:
    virtual ~AnswerProvider() = default;
    virtual const std::string& id() const = 0;
    virtual ProviderKind kind() const = 0;
    /// Raw reply for one item. Throws TransportError on endpoint failure.
    virtual std::string answer(const MCQItem& item, const std::string& prompt) const = 0;
    /// In-process providers report latency 0 so their record files are
    /// byte-reproducible.
    virtual bool measures_latency() const { return false; }
};

class LookupTableProvider final : public AnswerProvider {
public:
    LookupTableProvider(std::string id, std::map<std::string, int> answers);
    /// Answers every item with its ground-truth index.
    static LookupTableProvider oracle(std::string id, const RippleDataset& dataset);

    const std::string& id() const override { return id_; }
    ProviderKind kind() const override { return ProviderKind::lookup_table; }
    std::string answer(const MCQItem& item, const std::string& prompt) const override;

private:
    std::string id_;
    std::map<std::string, int> answers_;
};

class RemoteChatProvider final : public AnswerProvider {
public:
    RemoteChatProvider(std::string id, std::shared_ptr<const ChatClient> client);

    const std::string& id() const override { return id_; }
    ProviderKind kind() const override { return ProviderKind::remote_chat; }
    std::string answer(const MCQItem& item, const std::string& prompt) const override;
    bool measures_latency() const override { return true; }

private:
    std::string id_;
    std::shared_ptr<const ChatClient> client_;
};

struct AnswerRecord {
    std::string item_id;
    std::string provider_id;
    std::optional<int> chosen_index;  // nullopt = abstain
    bool correct = false;
    long long latency_ms = 0;
    std::string error;  // set when the provider failed for this item

    friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

/// Question, lettered choices, single-letter instruction.
std::string render_answer_prompt(const MCQItem& item);

/// First-letter extraction: optional "Answer:" prefix, opening brackets or
/// quotes, then A-D not followed by another letter. Lowercase a-d only
/// counts when it stands alone or is followed by ')', '.', ':' or ']'.
std::optional<int> parse_answer_letter(std::string_view reply);

struct EvalOptions {
    std::size_t concurrency = 1;
    std::optional<std::filesystem::path> records_path;  // appended as items finish
    bool resume = false;
    double max_error_fraction = 0.20;
};

/// One record per item, sorted by item_id. Provider failures become abstains
/// with an error note; more than max_error_fraction of them raises
/// RunFailedError after the records are written.
std::vector<AnswerRecord> evaluate(const AnswerProvider& provider, const RippleDataset& dataset,
                                   const EvalOptions& options = {});

nlohmann::ordered_json record_to_json(const AnswerRecord& r);
AnswerRecord record_from_json(const nlohmann::json& j);
void write_records(const std::vector<AnswerRecord>& records, const std::filesystem::path& path);
/// Tolerates a torn final line (interrupted run).
std::vector<AnswerRecord> read_records(const std::filesystem::path& path);

struct Tally {
    std::size_t n_correct = 0;
    std::size_t n_total = 0;
    double accuracy() const noexcept {
        return n_total == 0 ? 0.0 : static_cast<double>(n_correct) / static_cast<double>(n_total);
    }
    friend bool operator==(const Tally&, const Tally&) = default;
};

/// U(theta, c): per-topic accuracy plus per-distance rollups.
struct UtilityTable {
    std::string provider_id;
    std::map<std::string, Tally> per_topic;
    std::map<std::size_t, Tally> per_distance;
    Tally overall;
};

/// Throws IntegrityError for records whose item_id is not in the dataset or
/// that mix provider ids.
UtilityTable utility(const std::vector<AnswerRecord>& records, const RippleDataset& dataset);

/// U(base, c) - U(edited, c); positive when the edit lost knowledge of c.
double knowledge_delta(const UtilityTable& base, const UtilityTable& edited, const std::string& concept_name);

struct Bucketing {
    std::size_t width = 1;  // 1 == per sampled rank

    static Bucketing per_rank() { return {1}; }
    static Bucketing fixed(std::size_t w) { return {w}; }
    /// Lower edge of the bucket holding `distance` (1-based buckets).
    std::size_t bucket_of(std::size_t distance) const noexcept {
        return width <= 1 ? distance : ((distance - 1) / width) * width + 1;
    }
};

struct CurvePoint {
    std::size_t distance = 0;
    double mean_delta = 0.0;
    std::size_t n_concepts = 0;  // (target, topic) occurrences
    std::size_t n_questions = 0;
    double stderr_ = 0.0;
};

struct RippleCurve {
    std::string base_provider;
    std::string edited_provider;
    std::vector<CurvePoint> points;  // ascending distance
};

/// Mean knowledge-delta per distance bucket over (target, topic)
/// occurrences; a topic reached from several targets counts at each of its
/// distances.
RippleCurve ripple_curve(const UtilityTable& base, const UtilityTable& edited, const RippleDataset& dataset,
                         Bucketing bucketing = Bucketing::per_rank());
RippleCurve ripple_curve(const std::vector<AnswerRecord>& base, const std::vector<AnswerRecord>& edited,
                         const RippleDataset& dataset, Bucketing bucketing = Bucketing::per_rank());

struct AccuracyPoint {
    std::size_t distance = 0;
    std::string provider_id;
    double accuracy = 0.0;
    std::size_t n_questions = 0;
};

/// Question-level accuracy per distance bucket for one provider.
std::vector<AccuracyPoint> accuracy_curve(const std::vector<AnswerRecord>& records, const RippleDataset& dataset,
                                          Bucketing bucketing = Bucketing::per_rank());

struct SweepRow {
    std::string provider_id;
    std::size_t stage = 0;  // 0 = base, 1.. = series position
    std::size_t requested_distance = 0;
    std::size_t matched_distance = 0;  // nearest distance present in the dataset
    double accuracy = 0.0;
    std::size_t n_questions = 0;
    double delta_vs_base = 0.0;
};

inline const std::vector<std::size_t>& default_sweep_distances() {
    static const std::vector<std::size_t> d = {1, 50, 500};
    return d;
}

/// Nearest distance present in the dataset (ties go to the smaller one).
std::size_t nearest_distance(const RippleDataset& dataset, std::size_t requested);

std::vector<SweepRow> checkpoint_sweep(const std::vector<AnswerRecord>& base,
                                       const std::vector<std::vector<AnswerRecord>>& series,
                                       const RippleDataset& dataset,
                                       const std::vector<std::size_t>& distances = default_sweep_distances());

std::vector<SweepRow> checkpoint_sweep(const AnswerProvider& base,
                                       const std::vector<const AnswerProvider*>& series,
                                       const RippleDataset& dataset,
                                       const std::vector<std::size_t>& distances = default_sweep_distances(),
                                       const EvalOptions& options = {});

// CSV is the source of truth; SVGs are rendered from the CSV text.
std::string curve_csv(const RippleCurve& curve);
std::string accuracy_csv(const std::vector<AccuracyPoint>& points);
std::string sweep_csv(const std::vector<SweepRow>& rows);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Writes `csv_path` and, when given, an SVG derived from that CSV.
void emit_outputs(const RippleCurve& curve, const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& svg_path, const std::string& title = "Ripple effect");
void emit_outputs(const std::vector<SweepRow>& rows, const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& svg_path, const std::string& title = "Checkpoint sweep");

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace ripple
