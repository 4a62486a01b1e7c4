#include <fstream>
#include <set>

#include "ripple/error.hpp"
#include "ripple/genpipe.hpp"
#include "ripple/text.hpp"

namespace ripple {
namespace {

std::string dump_line(const nlohmann::ordered_json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

bool non_empty_string(const nlohmann::json& j, const char* key) {
    return j.contains(key) && j[key].is_string() && !j[key].get<std::string>().empty();
}

}  // namespace

nlohmann::ordered_json item_to_json(const MCQItem& item) {
    nlohmann::ordered_json j;
    j["item_id"] = item.item_id;
    j["target_qid"] = item.target_qid;
    j["topic"] = item.topic;
    j["semantic_distance"] = item.semantic_distance;
    j["question"] = item.stem;
    j["choices"] = item.choices;
    j["answer"] = item.answer_index;
    nlohmann::ordered_json p;
    p["generator_model"] = item.provenance.generator_model;
    p["fact_indices"] = item.provenance.fact_indices;
    p["prompt_hash"] = item.provenance.prompt_hash;
    p["repair_attempts"] = item.provenance.repair_attempts;
    j["provenance"] = std::move(p);
    return j;
}

std::optional<std::string> validate_item_json(const nlohmann::json& j) {
    if (!j.is_object()) return "line is not a JSON object";
    for (const char* key : {"item_id", "target_qid", "topic", "question"})
        if (!non_empty_string(j, key)) return std::string("field '") + key + "' must be a non-empty string";
    if (!j.contains("semantic_distance") || !j["semantic_distance"].is_number_unsigned() ||
        j["semantic_distance"].get<std::uint64_t>() == 0)
        return "field 'semantic_distance' must be a positive integer";
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].size() != 4)
        return "field 'choices' must be an array of exactly 4 strings";
    std::set<std::string> distinct;
    for (const auto& c : j["choices"]) {
        if (!c.is_string() || c.get<std::string>().empty()) return "every choice must be a non-empty string";
        distinct.insert(text::to_lower(text::trim(c.get<std::string>())));
    }
    if (distinct.size() != 4) return "choices must be distinct";
    if (!j.contains("answer") || !j["answer"].is_number_integer()) return "field 'answer' must be an integer";
    auto a = j["answer"].get<long long>();
    if (a < 0 || a > 3) return "field 'answer' must be in [0,3]";
    if (!j.contains("provenance") || !j["provenance"].is_object()) return "field 'provenance' must be an object";
    return std::nullopt;
}

MCQItem item_from_json(const nlohmann::json& j) {
    if (auto err = validate_item_json(j)) throw ContractError("invalid dataset item: " + *err);
    MCQItem item;
    item.item_id = j["item_id"].get<std::string>();
    item.target_qid = j["target_qid"].get<std::string>();
    item.topic = j["topic"].get<std::string>();
    item.semantic_distance = j["semantic_distance"].get<std::size_t>();
    item.stem = j["question"].get<std::string>();
    for (std::size_t i = 0; i < 4; ++i) item.choices[i] = j["choices"][i].get<std::string>();
    item.answer_index = j["answer"].get<int>();
    const auto& p = j["provenance"];
    item.provenance.generator_model = p.value("generator_model", std::string());
    if (p.contains("fact_indices") && p["fact_indices"].is_array())
        item.provenance.fact_indices = p["fact_indices"].get<std::vector<std::size_t>>();
    item.provenance.prompt_hash = p.value("prompt_hash", std::string());
    item.provenance.repair_attempts = p.value("repair_attempts", 0);
    return item;
}

std::string serialize_dataset_jsonl(const RippleDataset& dataset) {
    std::string out;
    for (const auto& it : dataset.items) {
        out += dump_line(item_to_json(it));
        out += '\n';
    }
    return out;
}

std::filesystem::path dataset_meta_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".meta.json");
}

void write_dataset(const RippleDataset& dataset, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << serialize_dataset_jsonl(dataset);
        if (!out) throw IoError("write failed: " + path.string());
    }
    nlohmann::ordered_json meta;
    meta["dataset_id"] = dataset.dataset_id;
    meta["stats"] = {{"topics", dataset.stats.topics}, {"questions", dataset.stats.questions}};
    meta["config"] = dataset.config;
    meta["targets"] = nlohmann::ordered_json::array();
    for (const auto& t : dataset.targets) {
        nlohmann::ordered_json e;
        e["topic"] = t.topic;
        e["source_qids"] = t.source_qids;
        e["resolution"] = t.resolution == TopicResolution::matched_title ? "matched-title" : "free-text";
        e["resolved_title"] = t.resolved_title;
        meta["targets"].push_back(std::move(e));
    }
    meta["skips"] = nlohmann::ordered_json::array();
    for (const auto& s : dataset.skips)
        meta["skips"].push_back({{"stage", s.stage}, {"key", s.key}, {"reason", s.reason}});

    auto meta_path = dataset_meta_path(path);
    std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + meta_path.string());
    out << meta.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

RippleDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    RippleDataset ds;
    ds.dataset_id = path.stem().string();
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (auto err = validate_item_json(j)) throw SchemaError(*err, lineno);
        MCQItem item = item_from_json(j);
        if (!ids.insert(item.item_id).second) throw DuplicateError(item.item_id, "item_id");
        ds.items.push_back(std::move(item));
    }

    auto meta_path = dataset_meta_path(path);
    if (std::filesystem::exists(meta_path)) {
        std::ifstream min(meta_path);
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(min);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("dataset meta: ") + e.what(), e.byte);
        }
        ds.dataset_id = meta.value("dataset_id", ds.dataset_id);
        if (meta.contains("config")) ds.config = meta["config"];
        if (meta.contains("targets"))
            for (const auto& t : meta["targets"]) {
                TopicRecord r;
                r.topic = t.value("topic", std::string());
                r.source_qids = t.value("source_qids", std::vector<std::string>{});
                r.resolution = t.value("resolution", std::string()) == "matched-title"
                                   ? TopicResolution::matched_title
                                   : TopicResolution::free_text;
                r.resolved_title = t.value("resolved_title", std::string());
                ds.targets.push_back(std::move(r));
            }
        if (meta.contains("skips"))
            for (const auto& s : meta["skips"])
                ds.skips.push_back({s.value("stage", std::string()), s.value("key", std::string()),
                                    s.value("reason", std::string())});
    }
    ds.recompute_stats();
    return ds;
}

}  // namespace ripple
