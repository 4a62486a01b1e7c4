#include "ripple/evalharness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "ripple/error.hpp"
#include "ripple/plot.hpp"
#include "ripple/text.hpp"

namespace ripple {
namespace {

constexpr const char* kLetters = "ABCD";

using ItemLookup = std::unordered_map<std::string, const MCQItem*>;

ItemLookup lookup_items(const RippleDataset& dataset) {
    ItemLookup m;
    m.reserve(dataset.items.size());
    for (const auto& it : dataset.items) m.emplace(it.item_id, &it);
    return m;
}

const MCQItem& find_item(const ItemLookup& items, const std::string& item_id) {
    auto it = items.find(item_id);
    if (it == items.end()) throw IntegrityError("record references unknown item_id: " + item_id);
    return *it->second;
}

std::string dump_line(const nlohmann::ordered_json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

AnswerRecord score(const MCQItem& item, const std::string& provider_id, const std::string& reply) {
    AnswerRecord r;
    r.item_id = item.item_id;
    r.provider_id = provider_id;
    r.chosen_index = parse_answer_letter(reply);
    r.correct = r.chosen_index && *r.chosen_index == item.answer_index;
    return r;
}

std::size_t count_errors(const std::vector<AnswerRecord>& records) {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const AnswerRecord& r) { return !r.error.empty(); }));
}

void check_csv_field(const std::string& s) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw ArgumentError("value not representable in CSV: '" + s + "'");
}

}  // namespace

LookupTableProvider::LookupTableProvider(std::string id, std::map<std::string, int> answers)
    : id_(std::move(id)), answers_(std::move(answers)) {}

LookupTableProvider LookupTableProvider::oracle(std::string id, const RippleDataset& dataset) {
    std::map<std::string, int> answers;
    for (const auto& it : dataset.items) answers[it.item_id] = it.answer_index;
    return LookupTableProvider(std::move(id), std::move(answers));
}

std::string LookupTableProvider::answer(const MCQItem& item, const std::string&) const {
    auto it = answers_.find(item.item_id);
    if (it == answers_.end() || it->second < 0 || it->second > 3) return {};
    return std::string(1, kLetters[it->second]);
}

RemoteChatProvider::RemoteChatProvider(std::string id, std::shared_ptr<const ChatClient> client)
    : id_(std::move(id)), client_(std::move(client)) {
    if (!client_) throw ArgumentError("remote provider needs a chat client");
}

std::string RemoteChatProvider::answer(const MCQItem& item, const std::string& prompt) const {
    ChatRequest req{task::answer, prompt, {{"key", item.item_id}, {"question", item.stem}}};
    return client_->complete(req);
}

std::string render_answer_prompt(const MCQItem& item) {
    return prompt_template("answer_v1")
        .render({{"question", item.stem},
                 {"choice_a", item.choices[0]},
                 {"choice_b", item.choices[1]},
                 {"choice_c", item.choices[2]},
                 {"choice_d", item.choices[3]}});
}

std::optional<int> parse_answer_letter(std::string_view reply) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    std::size_t i = 0;
    auto skip_space = [&] {
        while (i < reply.size() && is_space(reply[i])) ++i;
    };
    skip_space();
    if (reply.size() - i >= 7 && text::to_lower(reply.substr(i, 7)) == "answer:") {
        i += 7;
        skip_space();
    }
    while (i < reply.size() && std::string_view("([\"'*`").find(reply[i]) != std::string_view::npos) ++i;
    if (i >= reply.size()) return std::nullopt;
    char c = reply[i];
    char next = i + 1 < reply.size() ? reply[i + 1] : '\0';
    if (c >= 'A' && c <= 'D') {
        if (next != '\0' && is_alpha(next)) return std::nullopt;
        return c - 'A';
    }
    if (c >= 'a' && c <= 'd') {
        if (next == '\0' || next == ')' || next == '.' || next == ':' || next == ']') return c - 'a';
    }
    return std::nullopt;
}

nlohmann::ordered_json record_to_json(const AnswerRecord& r) {
    nlohmann::ordered_json j;
    j["item_id"] = r.item_id;
    j["provider_id"] = r.provider_id;
    if (r.chosen_index) j["chosen_index"] = *r.chosen_index;
    else j["chosen_index"] = nullptr;
    j["correct"] = r.correct;
    j["latency_ms"] = r.latency_ms;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

AnswerRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ContractError("answer record is not an object");
    AnswerRecord r;
    try {
        r.item_id = j.at("item_id").get<std::string>();
        r.provider_id = j.at("provider_id").get<std::string>();
        const auto& ci = j.at("chosen_index");
        if (!ci.is_null()) {
            int v = ci.get<int>();
            if (v < 0 || v > 3) throw ContractError("chosen_index out of range");
            r.chosen_index = v;
        }
        r.correct = j.at("correct").get<bool>();
        r.latency_ms = j.at("latency_ms").get<long long>();
        if (r.latency_ms < 0) throw ContractError("negative latency_ms");
        r.error = j.value("error", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("malformed answer record: ") + e.what());
    }
    return r;
}

void write_records(const std::vector<AnswerRecord>& records, const std::filesystem::path& path) {
    std::string out;
    for (const auto& r : records) out += dump_line(record_to_json(r)) + "\n";
    write_text_file(path, out);
}

std::vector<AnswerRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!text::trim(line).empty()) lines.push_back(line);
    std::vector<AnswerRecord> records;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
            if (i + 1 == lines.size()) {
                spdlog::warn("ignoring torn last record in {}", path.string());
                break;
            }
            throw SchemaError(std::string("invalid JSON: ") + e.what(), i + 1);
        }
        try {
            records.push_back(record_from_json(j));
        } catch (const ContractError& e) {
            throw SchemaError(e.what(), i + 1);
        }
    }
    return records;
}

std::vector<AnswerRecord> evaluate(const AnswerProvider& provider, const RippleDataset& dataset,
                                   const EvalOptions& options) {
    if (dataset.items.empty()) throw PreconditionError("cannot evaluate an empty dataset");
    if (options.concurrency == 0) throw ArgumentError("concurrency must be >= 1");

    const auto items = lookup_items(dataset);
    std::map<std::string, AnswerRecord> done;
    if (options.resume && options.records_path && std::filesystem::exists(*options.records_path)) {
        for (auto& r : read_records(*options.records_path)) {
            if (r.provider_id != provider.id() || !items.count(r.item_id) || !r.error.empty()) continue;
            done[r.item_id] = std::move(r);
        }
        spdlog::info("resuming {}: {} of {} items already answered", provider.id(), done.size(),
                     dataset.items.size());
    }

    std::vector<const MCQItem*> pending;
    for (const auto& it : dataset.items)
        if (!done.count(it.item_id)) pending.push_back(&it);

    std::ofstream sink;
    if (options.records_path) {
        // Rewrite what was kept, then append as items finish.
        std::vector<AnswerRecord> kept;
        for (auto& [_, r] : done) kept.push_back(r);
        write_records(kept, *options.records_path);
        sink.open(*options.records_path, std::ios::binary | std::ios::app);
        if (!sink) throw IoError("cannot append to " + options.records_path->string());
    }

    std::vector<AnswerRecord> fresh(pending.size());
    std::size_t finished = 0;
    const std::size_t report_every = std::max<std::size_t>(1, pending.size() / 10);
    const long long n_pending = static_cast<long long>(pending.size());

#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(options.concurrency))
    for (long long i = 0; i < n_pending; ++i) {
        const MCQItem& item = *pending[static_cast<std::size_t>(i)];
        AnswerRecord r;
        auto t0 = std::chrono::steady_clock::now();
        try {
            r = score(item, provider.id(), provider.answer(item, render_answer_prompt(item)));
        } catch (const Error& e) {
            r.item_id = item.item_id;
            r.provider_id = provider.id();
            r.error = e.what();
        }
        if (provider.measures_latency())
            r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        fresh[static_cast<std::size_t>(i)] = r;
#pragma omp critical(ripple_eval_sink)
        {
            if (sink.is_open()) {
                sink << dump_line(record_to_json(r)) << '\n';
                sink.flush();
            }
            if (++finished % report_every == 0 || finished == pending.size())
                spdlog::info("evaluate {}: {}/{} items", provider.id(), finished, pending.size());
        }
    }
    if (sink.is_open()) sink.close();

    for (auto& r : fresh) done[r.item_id] = std::move(r);
    std::vector<AnswerRecord> records;
    records.reserve(done.size());
    for (auto& [_, r] : done) records.push_back(std::move(r));
    if (options.records_path) write_records(records, *options.records_path);

    const std::size_t n_err = count_errors(records);
    if (static_cast<double>(n_err) > options.max_error_fraction * static_cast<double>(records.size()))
        throw RunFailedError(provider.id() + ": " + std::to_string(n_err) + " of " +
                             std::to_string(records.size()) + " items failed at the endpoint");
    if (n_err > 0) spdlog::warn("{}: {} items abstained after endpoint errors", provider.id(), n_err);
    return records;
}

UtilityTable utility(const std::vector<AnswerRecord>& records, const RippleDataset& dataset) {
    UtilityTable t;
    if (records.empty()) return t;
    const auto items = lookup_items(dataset);
    t.provider_id = records.front().provider_id;
    for (const auto& r : records) {
        if (r.provider_id != t.provider_id)
            throw IntegrityError("records mix providers '" + t.provider_id + "' and '" + r.provider_id + "'");
        const MCQItem& item = find_item(items, r.item_id);
        for (Tally* tally : {&t.per_topic[item.topic], &t.per_distance[item.semantic_distance], &t.overall}) {
            tally->n_total += 1;
            tally->n_correct += r.correct ? 1 : 0;
        }
    }
    return t;
}

double knowledge_delta(const UtilityTable& base, const UtilityTable& edited, const std::string& concept_name) {
    auto b = base.per_topic.find(concept_name);
    auto e = edited.per_topic.find(concept_name);
    if (b == base.per_topic.end() || e == edited.per_topic.end() || b->second.n_total == 0 ||
        e->second.n_total == 0)
        throw MissingConceptError(concept_name);
    return b->second.accuracy() - e->second.accuracy();
}

RippleCurve ripple_curve(const UtilityTable& base, const UtilityTable& edited, const RippleDataset& dataset,
                         Bucketing bucketing) {
    // One entry per (target, topic, distance) occurrence.
    std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> occurrences;
    for (const auto& it : dataset.items) ++occurrences[{it.target_qid, it.topic, it.semantic_distance}];

    struct Acc {
        std::vector<double> deltas;
        std::size_t n_questions = 0;
    };
    std::map<std::size_t, Acc> buckets;
    for (const auto& [key, n_items] : occurrences) {
        const auto& [target, topic, distance] = key;
        auto& acc = buckets[bucketing.bucket_of(distance)];
        acc.deltas.push_back(knowledge_delta(base, edited, topic));
        acc.n_questions += n_items;
    }

    RippleCurve curve{base.provider_id, edited.provider_id, {}};
    for (const auto& [distance, acc] : buckets) {
        const double n = static_cast<double>(acc.deltas.size());
        double sum = 0;
        for (double d : acc.deltas) sum += d;
        const double mean = sum / n;
        double ss = 0;
        for (double d : acc.deltas) ss += (d - mean) * (d - mean);
        const double se = acc.deltas.size() > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
        curve.points.push_back({distance, mean, acc.deltas.size(), acc.n_questions, se});
    }
    return curve;
}

RippleCurve ripple_curve(const std::vector<AnswerRecord>& base, const std::vector<AnswerRecord>& edited,
                         const RippleDataset& dataset, Bucketing bucketing) {
    return ripple_curve(utility(base, dataset), utility(edited, dataset), dataset, bucketing);
}

std::vector<AccuracyPoint> accuracy_curve(const std::vector<AnswerRecord>& records, const RippleDataset& dataset,
                                          Bucketing bucketing) {
    const auto items = lookup_items(dataset);
    std::map<std::size_t, Tally> buckets;
    std::string provider = records.empty() ? std::string() : records.front().provider_id;
    for (const auto& r : records) {
        if (r.provider_id != provider) throw IntegrityError("records mix providers");
        auto& t = buckets[bucketing.bucket_of(find_item(items, r.item_id).semantic_distance)];
        t.n_total += 1;
        t.n_correct += r.correct ? 1 : 0;
    }
    std::vector<AccuracyPoint> out;
    for (const auto& [d, t] : buckets) out.push_back({d, provider, t.accuracy(), t.n_total});
    return out;
}

std::size_t nearest_distance(const RippleDataset& dataset, std::size_t requested) {
    std::set<std::size_t> present;
    for (const auto& it : dataset.items) present.insert(it.semantic_distance);
    if (present.empty()) throw PreconditionError("dataset has no items");
    auto dist = [&](std::size_t d) { return d > requested ? d - requested : requested - d; };
    std::size_t best = *present.begin();
    for (std::size_t d : present)
        if (dist(d) < dist(best)) best = d;  // strict: ties keep the smaller distance
    return best;
}

std::vector<SweepRow> checkpoint_sweep(const std::vector<AnswerRecord>& base,
                                       const std::vector<std::vector<AnswerRecord>>& series,
                                       const RippleDataset& dataset, const std::vector<std::size_t>& distances) {
    if (series.size() < 2) throw ArgumentError("a checkpoint sweep needs at least 2 providers in the series");
    if (distances.empty()) throw ArgumentError("no sweep distances given");
    const auto base_table = utility(base, dataset);

    std::vector<std::pair<std::size_t, std::size_t>> slices;  // requested, matched
    for (std::size_t d : distances) {
        std::size_t m = nearest_distance(dataset, d);
        if (m != d) spdlog::info("sweep distance {} not sampled; using nearest {}", d, m);
        slices.emplace_back(d, m);
    }

    auto at = [](const UtilityTable& t, std::size_t d) {
        auto it = t.per_distance.find(d);
        return it == t.per_distance.end() ? Tally{} : it->second;
    };

    std::vector<SweepRow> rows;
    auto add_rows = [&](const UtilityTable& table, std::size_t stage) {
        for (auto [req, matched] : slices) {
            Tally t = at(table, matched);
            if (t.n_total == 0)
                throw PreconditionError("provider '" + table.provider_id + "' has no records at distance " +
                                        std::to_string(matched));
            rows.push_back({table.provider_id, stage, req, matched, t.accuracy(), t.n_total,
                            at(base_table, matched).accuracy() - t.accuracy()});
        }
    };
    add_rows(base_table, 0);
    for (std::size_t s = 0; s < series.size(); ++s) add_rows(utility(series[s], dataset), s + 1);
    return rows;
}

std::vector<SweepRow> checkpoint_sweep(const AnswerProvider& base, const std::vector<const AnswerProvider*>& series,
                                       const RippleDataset& dataset, const std::vector<std::size_t>& distances,
                                       const EvalOptions& options) {
    EvalOptions opts = options;
    opts.records_path.reset();
    opts.resume = false;
    auto base_records = evaluate(base, dataset, opts);
    std::vector<std::vector<AnswerRecord>> series_records;
    for (const auto* p : series) {
        if (!p) throw ArgumentError("null provider in sweep series");
        series_records.push_back(evaluate(*p, dataset, opts));
    }
    return checkpoint_sweep(base_records, series_records, dataset, distances);
}

std::string format_double(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw ContractError("cannot format double");
    return std::string(buf, ptr);
}

std::string curve_csv(const RippleCurve& curve) {
    std::string out = "distance,mean_delta,n_concepts,n_questions,stderr\n";
    for (const auto& p : curve.points)
        out += std::to_string(p.distance) + "," + format_double(p.mean_delta) + "," + std::to_string(p.n_concepts) +
               "," + std::to_string(p.n_questions) + "," + format_double(p.stderr_) + "\n";
    return out;
}

std::string accuracy_csv(const std::vector<AccuracyPoint>& points) {
    std::string out = "distance,provider_id,accuracy,n_questions\n";
    for (const auto& p : points) {
        check_csv_field(p.provider_id);
        out += std::to_string(p.distance) + "," + p.provider_id + "," + format_double(p.accuracy) + "," +
               std::to_string(p.n_questions) + "\n";
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "provider_id,stage,requested_distance,matched_distance,accuracy,n_questions,delta_vs_base\n";
    for (const auto& r : rows) {
        check_csv_field(r.provider_id);
        out += r.provider_id + "," + std::to_string(r.stage) + "," + std::to_string(r.requested_distance) + "," +
               std::to_string(r.matched_distance) + "," + format_double(r.accuracy) + "," +
               std::to_string(r.n_questions) + "," + format_double(r.delta_vs_base) + "\n";
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

void emit_outputs(const RippleCurve& curve, const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& svg_path, const std::string& title) {
    if (curve.points.empty()) throw PreconditionError("ripple curve has no points");
    const std::string csv = curve_csv(curve);
    write_text_file(csv_path, csv);
    if (svg_path) write_text_file(*svg_path, plot::csv_to_svg(csv, title));
}

void emit_outputs(const std::vector<SweepRow>& rows, const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& svg_path, const std::string& title) {
    if (rows.empty()) throw PreconditionError("sweep table is empty");
    const std::string csv = sweep_csv(rows);
    write_text_file(csv_path, csv);
    if (svg_path) write_text_file(*svg_path, plot::csv_to_svg(csv, title));
}

}  // namespace ripple
