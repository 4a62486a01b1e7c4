#include "ripple/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "ripple/chat.hpp"
#include "ripple/corpus.hpp"
#include "ripple/distance.hpp"
#include "ripple/embedder.hpp"
#include "ripple/error.hpp"
#include "ripple/hash.hpp"
#include "ripple/genpipe.hpp"
#include "ripple/plot.hpp"
#include "ripple/simlab.hpp"
#include "ripple/vindex.hpp"

namespace ripple::cli {
namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string log_level = "info";
    bool json = false;
    std::size_t parallelism = 1;
};

struct EmbedFlags {
    std::string kind = "local";
    std::string url;
    std::string model = "local-hash-v1";
    std::size_t dim = 64;
    std::size_t batch_size = 32;
};

void add_embed_flags(CLI::App* app, EmbedFlags& f) {
    app->add_option("--embedder", f.kind, "local or remote")
        ->check(CLI::IsMember({"local", "remote"}))
        ->capture_default_str();
    app->add_option("--embed-url", f.url, "embeddings endpoint (remote)");
    app->add_option("--embed-model", f.model, "embedding model name")->capture_default_str();
    app->add_option("--dim", f.dim, "embedding dimension")->capture_default_str();
    app->add_option("--batch-size", f.batch_size, "texts per embedding request")->capture_default_str();
}

EmbedderConfig embedder_config(const EmbedFlags& f, const Globals& g) {
    EmbedderConfig c;
    c.kind = f.kind == "remote" ? EmbedderKind::remote : EmbedderKind::local_deterministic;
    c.endpoint_url = f.url;
    c.model_name = f.model;
    c.dim = f.dim;
    c.batch_size = f.batch_size;
    c.batch_parallelism = g.parallelism;
    c.validate();
    return c;
}

void print(const Globals& g, const nlohmann::ordered_json& j, const std::string& human) {
    if (g.json) std::cout << j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    else std::cout << human;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what(), e.byte);
    }
}

Bucketing parse_bucketing(const std::string& s) {
    if (s == "per-rank") return Bucketing::per_rank();
    std::string w = s.rfind("width:", 0) == 0 ? s.substr(6) : s;
    try {
        std::size_t used = 0;
        unsigned long v = std::stoul(w, &used);
        if (used == w.size() && v > 0) return Bucketing::fixed(v);
    } catch (const std::exception&) {
    }
    throw ArgumentError("bucket must be 'per-rank' or 'width:N', got '" + s + "'");
}

std::vector<std::size_t> parse_distances(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            unsigned long v = std::stoul(part, &used);
            if (used != part.size() || v == 0) throw std::invalid_argument(part);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ArgumentError("bad distance '" + part + "'");
        }
    }
    if (out.empty()) throw ArgumentError("no distances given");
    return out;
}

std::shared_ptr<ChatClient> make_chat(const std::string& kind, const std::string& model,
                                      const std::string& stub_replies) {
    if (kind == "stub") {
        if (stub_replies.empty()) return std::make_shared<StubChatClient>();
        return std::make_shared<StubChatClient>(StubChatClient::from_json_file(stub_replies));
    }
    if (model.empty()) throw ArgumentError("--chat remote needs --chat-model");
    return std::make_shared<RemoteChatClient>(RemoteChatClient::from_env(model));
}

void set_log_level(const std::string& level) {
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::get("ripple");
        if (!l) l = spdlog::stderr_logger_mt("ripple");
        l->set_pattern("[%l] %v");
        return l;
    }();
    spdlog::set_default_logger(logger);
    auto lvl = spdlog::level::from_str(level);
    if (lvl == spdlog::level::off && level != "off") throw ArgumentError("unknown log level: " + level);
    spdlog::set_level(lvl);
}

}  // namespace

std::unique_ptr<AnswerProvider> make_provider(const nlohmann::json& config, std::uint64_t default_seed,
                                              const RippleDataset& dataset) {
    if (!config.is_object()) throw ArgumentError("provider config must be a JSON object");
    const std::string id = config.value("id", std::string());
    const std::string kind = config.value("kind", std::string());
    if (id.empty()) throw ArgumentError("provider config needs a non-empty 'id'");
    const std::uint64_t seed = config.value("seed", default_seed);

    if (kind == "simulated") {
        if (config.value("uniform", false)) return std::make_unique<sim::UniformRandomProvider>(id, seed);
        if (!config.contains("profile") || !config["profile"].is_string())
            throw ArgumentError("simulated provider '" + id + "' needs a 'profile' string or \"uniform\": true");
        return std::make_unique<sim::SimulatedProvider>(
            id, sim::DegradationProfile::parse(config["profile"].get<std::string>()), seed);
    }
    if (kind == "lookup-table") {
        if (config.value("oracle", false))
            return std::make_unique<LookupTableProvider>(LookupTableProvider::oracle(id, dataset));
        if (!config.contains("answers") || !config["answers"].is_object())
            throw ArgumentError("lookup-table provider '" + id + "' needs an 'answers' object or \"oracle\": true");
        std::map<std::string, int> answers;
        for (const auto& [k, v] : config["answers"].items()) {
            if (!v.is_number_integer()) throw ArgumentError("answer for " + k + " must be an integer index");
            answers[k] = v.get<int>();
        }
        return std::make_unique<LookupTableProvider>(id, std::move(answers));
    }
    if (kind == "remote-chat") {
        const std::string model = config.value("model", std::string());
        if (model.empty()) throw ArgumentError("remote-chat provider '" + id + "' needs a 'model'");
        std::shared_ptr<const ChatClient> client;
        if (config.contains("url"))
            client = std::make_shared<RemoteChatClient>(config["url"].get<std::string>(), model);
        else
            client = std::make_shared<RemoteChatClient>(RemoteChatClient::from_env(model));
        return std::make_unique<RemoteChatProvider>(id, std::move(client));
    }
    throw ArgumentError("unknown provider kind '" + kind + "' (simulated, lookup-table, remote-chat)");
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"ripple: build ripple-effect datasets and measure how edits spread to nearby knowledge", "ripple"};
    app.set_config("--config", "", "TOML-style config file (flags override it)");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")->capture_default_str();
    app.add_flag("--json", g.json, "machine-readable output on stdout");
    app.add_option("--parallelism", g.parallelism, "max concurrent outbound requests / worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse a wiki XML dump or JSONL corpus into canonical JSONL");
    std::string in_path, in_format = "auto", in_out;
    std::size_t in_max_docs = 0, in_max_chars = kDefaultIngestCap;
    ingest->add_option("--input", in_path, "dump (.xml) or JSONL file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--format", in_format, "auto, xml or jsonl")
        ->check(CLI::IsMember({"auto", "xml", "jsonl"}))
        ->capture_default_str();
    ingest->add_option("--out", in_out, "output corpus JSONL")->required();
    ingest->add_option("--max-docs", in_max_docs, "stop after N documents (0 = all)");
    ingest->add_option("--max-chars", in_max_chars, "per-document truncation cap")->capture_default_str();

    // synth-corpus
    auto* synth = app.add_subcommand("synth-corpus", "Write a planted-cluster or random synthetic corpus");
    std::string sy_kind = "planted", sy_out, sy_sources;
    sim::PlantedCorpusSpec sy_spec;
    std::size_t sy_docs = 200, sy_targets = 2;
    synth->add_option("--kind", sy_kind, "planted or random")
        ->check(CLI::IsMember({"planted", "random"}))
        ->capture_default_str();
    synth->add_option("--out", sy_out, "output corpus JSONL")->required();
    synth->add_option("--clusters", sy_spec.n_clusters, "planted clusters")->capture_default_str();
    synth->add_option("--docs-per-cluster", sy_spec.docs_per_cluster, "planted docs per cluster")
        ->capture_default_str();
    synth->add_option("--overlap", sy_spec.intra_cluster_vocab_overlap, "intra-cluster vocabulary overlap in (0,1]")
        ->capture_default_str();
    synth->add_option("--dim", sy_spec.embed_dim, "local embedder dim the clusters target")->capture_default_str();
    synth->add_option("--docs", sy_docs, "random corpus size")->capture_default_str();
    synth->add_option("--sources", sy_sources, "also write source questions JSONL naming cluster heads");
    synth->add_option("--n-targets", sy_targets, "source questions to write")->capture_default_str();

    // embed
    auto* embed = app.add_subcommand("embed", "Embed one text, or a whole corpus into a vector file");
    std::string em_text, em_corpus, em_out;
    EmbedFlags em_flags;
    embed->add_option("--text", em_text, "embed this text and print the vector");
    embed->add_option("--corpus", em_corpus, "corpus JSONL to embed")->check(CLI::ExistingFile);
    embed->add_option("--out", em_out, "vector file (index format)");
    add_embed_flags(embed, em_flags);

    // index build / query
    auto* index = app.add_subcommand("index", "Build or query the flat vector index");
    index->require_subcommand(1);
    auto* ibuild = index->add_subcommand("build", "Embed a corpus and write the index");
    std::string ib_corpus, ib_out;
    EmbedFlags ib_flags;
    ibuild->add_option("--corpus", ib_corpus, "corpus JSONL")->required()->check(CLI::ExistingFile);
    ibuild->add_option("--out", ib_out, "index file")->required();
    add_embed_flags(ibuild, ib_flags);
    auto* iquery = index->add_subcommand("query", "Top-k neighbors of a stored title or free text");
    std::string iq_index, iq_title, iq_text;
    std::size_t iq_k = 10;
    EmbedFlags iq_flags;
    iquery->add_option("--index", iq_index, "index file")->required()->check(CLI::ExistingFile);
    auto* iq_title_opt = iquery->add_option("--title", iq_title, "stored title to query by");
    iquery->add_option("--text", iq_text, "free text to query by")->excludes(iq_title_opt);
    iquery->add_option("-k,--k", iq_k, "neighbors to return")->capture_default_str();
    add_embed_flags(iquery, iq_flags);

    // neighbors
    auto* neighbors = app.add_subcommand("neighbors", "Rank-sampled neighbor list for one concept");
    std::string nb_index, nb_target, nb_out;
    bool nb_free = false, nb_keep_self = false;
    std::size_t nb_n = 1000, nb_step = 5;
    EmbedFlags nb_flags;
    neighbors->add_option("--index", nb_index, "index file")->required()->check(CLI::ExistingFile);
    neighbors->add_option("--target", nb_target, "concept")->required();
    neighbors->add_flag("--free-text", nb_free, "embed the target text instead of using a stored title");
    neighbors->add_flag("--keep-self", nb_keep_self, "do not drop the target's own entry");
    neighbors->add_option("--n", nb_n, "ranks retrieved")->capture_default_str();
    neighbors->add_option("--step", nb_step, "rank sampling step")->capture_default_str();
    neighbors->add_option("--out", nb_out, "write JSON here instead of stdout");
    add_embed_flags(neighbors, nb_flags);

    // build-dataset
    auto* build = app.add_subcommand("build-dataset", "Topics -> neighbors -> facts -> questions -> filter");
    std::string bd_corpus, bd_index, bd_sources, bd_out, bd_chat = "stub", bd_model, bd_stub, bd_id = "ripple-dataset";
    BuildConfig bcfg;
    EmbedFlags bd_flags;
    build->add_option("--corpus", bd_corpus, "corpus JSONL")->required()->check(CLI::ExistingFile);
    build->add_option("--index", bd_index, "index file")->required()->check(CLI::ExistingFile);
    build->add_option("--sources", bd_sources, "source questions JSONL")->required()->check(CLI::ExistingFile);
    build->add_option("--out", bd_out, "dataset JSONL (a .meta.json sidecar is written next to it)")->required();
    build->add_option("--chat", bd_chat, "stub or remote")->check(CLI::IsMember({"stub", "remote"}))->capture_default_str();
    build->add_option("--chat-model", bd_model, "remote chat model name");
    build->add_option("--stub-replies", bd_stub, "canned stub replies JSON")->check(CLI::ExistingFile);
    build->add_option("--dataset-id", bd_id, "dataset id")->capture_default_str();
    build->add_option("--n", bcfg.n_retrieve, "ranks retrieved per target")->capture_default_str();
    build->add_option("--step", bcfg.rank_step, "rank sampling step")->capture_default_str();
    build->add_option("--k", bcfg.k, "questions per topic")->capture_default_str();
    build->add_option("--max-facts", bcfg.max_facts, "facts per topic")->capture_default_str();
    build->add_option("--min-resolve-similarity", bcfg.min_resolve_similarity,
                      "similarity needed to map a free-text topic onto a stored title")
        ->capture_default_str();
    add_embed_flags(build, bd_flags);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Answer every dataset item with one provider");
    std::string ev_dataset, ev_provider, ev_out;
    bool ev_resume = false;
    double ev_max_err = 0.20;
    eval->add_option("--dataset", ev_dataset, "dataset JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--provider-config", ev_provider, "provider config JSON")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", ev_out, "answer records JSONL")->required();
    eval->add_flag("--resume", ev_resume, "keep records already in --out and answer the rest");
    eval->add_option("--max-error-fraction", ev_max_err, "fail the run above this share of endpoint errors")
        ->capture_default_str();

    // ripple
    auto* ripple = app.add_subcommand("ripple", "Knowledge-delta curve from base and edited records");
    std::string rp_base, rp_edited, rp_dataset, rp_bucket = "per-rank", rp_csv, rp_svg, rp_acc, rp_title = "Ripple effect";
    ripple->add_option("--base", rp_base, "base answer records")->required()->check(CLI::ExistingFile);
    ripple->add_option("--edited", rp_edited, "edited answer records")->required()->check(CLI::ExistingFile);
    ripple->add_option("--dataset", rp_dataset, "dataset JSONL")->required()->check(CLI::ExistingFile);
    ripple->add_option("--bucket", rp_bucket, "per-rank or width:N")->capture_default_str();
    ripple->add_option("--csv", rp_csv, "curve CSV")->required();
    ripple->add_option("--svg", rp_svg, "curve SVG");
    ripple->add_option("--accuracy-csv", rp_acc, "per-provider accuracy by distance");
    ripple->add_option("--title", rp_title, "plot title")->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Accuracy at selected distances across a checkpoint series");
    std::string sw_dataset, sw_base, sw_distances = "1,50,500", sw_csv, sw_svg, sw_title = "Checkpoint sweep";
    std::vector<std::string> sw_series;
    sweep->add_option("--dataset", sw_dataset, "dataset JSONL")->required()->check(CLI::ExistingFile);
    sweep->add_option("--base", sw_base, "base provider config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--series", sw_series, "provider configs, in checkpoint order")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--distances", sw_distances, "comma-separated distances")->capture_default_str();
    sweep->add_option("--csv", sw_csv, "sweep CSV")->required();
    sweep->add_option("--svg", sw_svg, "sweep SVG");
    sweep->add_option("--title", sw_title, "plot title")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Recover a planted ripple profile with simulated providers");
    std::string sm_profile, sm_dataset, sm_report, sm_bucket = "per-rank";
    std::size_t sm_qpb = 500, sm_n = 1000, sm_step = 5, sm_qpt = 5;
    double sm_tol = 0.05;
    simulate->add_option("--profile", sm_profile, "step:p0,p1,r | exp:p0,p1,lambda | constant:p0")->required();
    simulate->add_option("--dataset", sm_dataset, "dataset JSONL (default: synthesize one)")->check(CLI::ExistingFile);
    simulate->add_option("--qpb", sm_qpb, "questions per bucket")->capture_default_str();
    simulate->add_option("--tol", sm_tol, "allowed |estimated - planted| per bucket")->capture_default_str();
    simulate->add_option("--report", sm_report, "report JSON");
    simulate->add_option("--bucket", sm_bucket, "per-rank or width:N")->capture_default_str();
    simulate->add_option("--n", sm_n, "synthetic dataset: ranks")->capture_default_str();
    simulate->add_option("--step", sm_step, "synthetic dataset: rank step")->capture_default_str();
    simulate->add_option("--questions-per-topic", sm_qpt, "synthetic dataset: questions per topic")
        ->capture_default_str();

    // plot
    auto* plotc = app.add_subcommand("plot", "Render a curve or sweep CSV as SVG");
    std::string pl_csv, pl_svg, pl_title = "ripple", pl_x, pl_y, pl_series;
    plotc->add_option("--csv", pl_csv, "input CSV")->required()->check(CLI::ExistingFile);
    plotc->add_option("--svg", pl_svg, "output SVG")->required();
    plotc->add_option("--title", pl_title, "plot title")->capture_default_str();
    plotc->add_option("--x", pl_x, "x column (default inferred)");
    plotc->add_option("--y", pl_y, "y column (default inferred)");
    plotc->add_option("--series", pl_series, "series column (default inferred)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        set_log_level(g.log_level);
        spdlog::info("effective config:\n{}", app.config_to_str(true, false));

        if (*ingest) {
            IngestLimits limits;
            if (in_max_docs > 0) limits.max_docs = in_max_docs;
            limits.max_chars = in_max_chars;
            std::string fmt = in_format;
            if (fmt == "auto") fmt = in_path.size() >= 4 && in_path.substr(in_path.size() - 4) == ".xml" ? "xml" : "jsonl";
            Corpus corpus = fmt == "xml" ? ingest_xml_dump(in_path, limits) : ingest_jsonl(in_path, limits);
            write_jsonl(corpus, in_out);
            print(g, {{"documents", corpus.size()}, {"truncated", corpus.truncated_count()}, {"out", in_out}},
                  "ingested " + std::to_string(corpus.size()) + " documents (" +
                      std::to_string(corpus.truncated_count()) + " truncated) -> " + in_out + "\n");
        } else if (*synth) {
            sy_spec.seed = g.seed;
            Corpus corpus = sy_kind == "planted" ? sim::make_planted_corpus(sy_spec)
                                                 : sim::make_random_corpus(sy_docs, g.seed);
            write_jsonl(corpus, sy_out);
            std::size_t written = 0;
            if (!sy_sources.empty()) {
                // One question per cluster head, quoting the title.
                std::string lines;
                std::size_t stride = sy_kind == "planted" ? sy_spec.docs_per_cluster : 1;
                for (std::size_t i = 0; i < sy_targets && i * stride < corpus.size(); ++i) {
                    nlohmann::ordered_json q;
                    char qid[32];
                    std::snprintf(qid, sizeof qid, "q%03zu", i);
                    q["qid"] = qid;
                    q["question"] = "What is known about \"" + corpus.documents()[i * stride].title + "\"?";
                    lines += q.dump() + "\n";
                    ++written;
                }
                write_text_file(sy_sources, lines);
            }
            print(g, {{"documents", corpus.size()}, {"sources", written}, {"out", sy_out}},
                  "wrote " + std::to_string(corpus.size()) + " documents -> " + sy_out + "\n");
        } else if (*embed) {
            EmbedderConfig ec = embedder_config(em_flags, g);
            if (!em_text.empty()) {
                auto v = embed_one(ec, em_text);
                std::vector<float> vals(v.values().begin(), v.values().end());
                print(g, {{"dim", v.dim()}, {"vector", vals}}, nlohmann::json(vals).dump() + "\n");
            } else {
                if (em_corpus.empty() || em_out.empty())
                    throw ArgumentError("embed needs --text, or --corpus with --out");
                auto vi = build_index(ingest_jsonl(em_corpus), ec);
                save_index(vi, em_out);
                print(g, {{"vectors", vi.size()}, {"dim", vi.dim()}, {"out", em_out}},
                      "embedded " + std::to_string(vi.size()) + " documents -> " + em_out + "\n");
            }
        } else if (*ibuild) {
            auto vi = build_index(ingest_jsonl(ib_corpus), embedder_config(ib_flags, g));
            save_index(vi, ib_out);
            print(g, {{"entries", vi.size()}, {"dim", vi.dim()}, {"fingerprint", hex64(vi.fingerprint())}},
                  "indexed " + std::to_string(vi.size()) + " documents -> " + ib_out + "\n");
        } else if (*iquery) {
            auto vi = load_index(iq_index);
            std::vector<RankedNeighbor> hits;
            if (!iq_title.empty()) hits = query_by_title(vi, iq_title, iq_k);
            else if (!iq_text.empty()) hits = query(vi, embed_one(embedder_config(iq_flags, g), iq_text), iq_k);
            else throw ArgumentError("index query needs --title or --text");
            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            std::string human;
            for (const auto& h : hits) {
                j.push_back({{"rank", h.rank}, {"doc_id", h.doc_id}, {"title", h.title}, {"similarity", h.similarity}});
                human += std::to_string(h.rank) + "\t" + format_double(h.similarity) + "\t" + h.title + "\n";
            }
            print(g, j, human);
        } else if (*neighbors) {
            auto vi = load_index(nb_index);
            auto dc = DistanceConfig::for_mode(nb_free ? QueryMode::by_free_text : QueryMode::by_stored_title, nb_n,
                                               nb_step);
            if (nb_keep_self) dc.exclude_self = false;
            auto list = neighbor_list(vi, embedder_config(nb_flags, g), nb_target, dc);
            auto j = to_json(list, dc);
            if (!nb_out.empty()) write_text_file(nb_out, j.dump(2) + "\n");
            std::string human;
            for (const auto& n : list.neighbors)
                human += std::to_string(n.rank) + "\t" + std::string(tier_label(n.rank)) + "\t" + n.title + "\n";
            if (nb_out.empty()) print(g, j, human);
        } else if (*build) {
            Corpus corpus = ingest_jsonl(bd_corpus);
            auto vi = load_index(bd_index);
            bcfg.dataset_id = bd_id;
            bcfg.parallelism = g.parallelism;
            bcfg.embedder = embedder_config(bd_flags, g);
            auto client = make_chat(bd_chat, bd_model, bd_stub);
            auto ds = build_dataset(corpus, vi, load_source_questions(bd_sources), bcfg, *client, g.seed);
            write_dataset(ds, bd_out);
            print(g,
                  {{"dataset_id", ds.dataset_id},
                   {"targets", ds.targets.size()},
                   {"topics", ds.stats.topics},
                   {"questions", ds.stats.questions},
                   {"skips", ds.skips.size()},
                   {"out", bd_out}},
                  "built " + std::to_string(ds.stats.questions) + " questions over " +
                      std::to_string(ds.stats.topics) + " topics (" + std::to_string(ds.skips.size()) +
                      " skips) -> " + bd_out + "\n");
        } else if (*eval) {
            auto ds = read_dataset(ev_dataset);
            auto provider = make_provider(read_json_file(ev_provider), g.seed, ds);
            EvalOptions opts;
            opts.concurrency = g.parallelism;
            opts.records_path = ev_out;
            opts.resume = ev_resume;
            opts.max_error_fraction = ev_max_err;
            auto records = evaluate(*provider, ds, opts);
            auto table = utility(records, ds);
            print(g,
                  {{"provider_id", provider->id()},
                   {"records", records.size()},
                   {"accuracy", table.overall.accuracy()},
                   {"out", ev_out}},
                  provider->id() + ": accuracy " + format_double(table.overall.accuracy()) + " over " +
                      std::to_string(records.size()) + " items -> " + ev_out + "\n");
        } else if (*ripple) {
            auto ds = read_dataset(rp_dataset);
            auto base = read_records(rp_base);
            auto edited = read_records(rp_edited);
            auto bucketing = parse_bucketing(rp_bucket);
            auto curve = ripple_curve(base, edited, ds, bucketing);
            emit_outputs(curve, rp_csv, rp_svg.empty() ? std::nullopt : std::optional<std::filesystem::path>(rp_svg),
                         rp_title);
            if (!rp_acc.empty()) {
                auto pts = accuracy_curve(base, ds, bucketing);
                auto more = accuracy_curve(edited, ds, bucketing);
                pts.insert(pts.end(), more.begin(), more.end());
                write_text_file(rp_acc, accuracy_csv(pts));
            }
            print(g, {{"points", curve.points.size()}, {"csv", rp_csv}},
                  "ripple curve with " + std::to_string(curve.points.size()) + " points -> " + rp_csv + "\n");
        } else if (*sweep) {
            auto ds = read_dataset(sw_dataset);
            auto base = make_provider(read_json_file(sw_base), g.seed, ds);
            std::vector<std::unique_ptr<AnswerProvider>> owned;
            std::vector<const AnswerProvider*> series;
            for (const auto& path : sw_series) {
                owned.push_back(make_provider(read_json_file(path), g.seed, ds));
                series.push_back(owned.back().get());
            }
            EvalOptions opts;
            opts.concurrency = g.parallelism;
            auto rows = checkpoint_sweep(*base, series, ds, parse_distances(sw_distances), opts);
            emit_outputs(rows, sw_csv, sw_svg.empty() ? std::nullopt : std::optional<std::filesystem::path>(sw_svg),
                         sw_title);
            print(g, {{"rows", rows.size()}, {"csv", sw_csv}},
                  "sweep with " + std::to_string(rows.size()) + " rows -> " + sw_csv + "\n");
        } else if (*simulate) {
            auto profile = sim::DegradationProfile::parse(sm_profile);
            RippleDataset ds;
            if (!sm_dataset.empty()) {
                ds = read_dataset(sm_dataset);
            } else {
                if (sm_qpt == 0 || sm_qpb % sm_qpt != 0)
                    throw ArgumentError("--qpb must be a multiple of --questions-per-topic");
                sim::SyntheticDatasetSpec spec;
                spec.n_retrieve = sm_n;
                spec.rank_step = sm_step;
                spec.topics_per_rank = sm_qpb / sm_qpt;
                spec.questions_per_topic = sm_qpt;
                spec.seed = g.seed;
                ds = sim::make_synthetic_dataset(spec);
            }
            auto rep = sim::recovery_test(profile, ds, sm_qpb, sm_tol, g.seed, parse_bucketing(sm_bucket),
                                          g.parallelism);
            if (!sm_report.empty()) write_text_file(sm_report, rep.to_json().dump(2) + "\n");
            print(g, rep.to_json(),
                  std::string(rep.passed ? "PASS" : "FAIL") + " " + rep.profile + ": worst |error| " +
                      format_double(rep.worst_error) + " at distance " + std::to_string(rep.worst_distance) +
                      " (tolerance " + format_double(rep.tolerance) + ")\n");
            if (!rep.passed) throw RunFailedError("planted profile not recovered within tolerance");
        } else if (*plotc) {
            std::ifstream in(pl_csv, std::ios::binary);
            if (!in) throw IoError("cannot open " + pl_csv);
            std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            std::optional<plot::Columns> cols;
            if (!pl_x.empty() || !pl_y.empty() || !pl_series.empty()) {
                auto inferred = plot::infer_columns(plot::parse_csv(csv));
                cols = plot::Columns{pl_x.empty() ? inferred.x : pl_x, pl_y.empty() ? inferred.y : pl_y,
                                     pl_series.empty() ? inferred.series : pl_series};
            }
            write_text_file(pl_svg, plot::csv_to_svg(csv, pl_title, cols));
            print(g, {{"svg", pl_svg}}, "wrote " + pl_svg + "\n");
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    for (const auto& a : args) argv.push_back(a.c_str());
    argv.push_back(nullptr);
    return dispatch(static_cast<int>(args.size()), argv.data());
}

}  // namespace ripple::cli
