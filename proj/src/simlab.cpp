#include "ripple/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "ripple/embedder.hpp"
#include "ripple/error.hpp"
#include "ripple/hash.hpp"

namespace ripple::sim {
namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

// Counter stream over one seed.
struct Stream {
    std::uint64_t seed;
    std::uint64_t counter = 0;
    std::uint64_t next(std::uint64_t bound) { return bounded(seed, counter++, bound); }
    double uniform() { return unit_uniform(mix(seed, counter++)); }
};

std::string make_word(Stream& s) {
    std::string w;
    const std::size_t syllables = 2 + s.next(3);
    for (std::size_t i = 0; i < syllables; ++i) {
        w.push_back(kConsonants[s.next(14)]);
        w.push_back(kVowels[s.next(5)]);
    }
    return w;
}

std::string capitalized(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

// Joins tokens into capitalized sentences of 6-10 words.
std::string sentences(const std::vector<std::string>& tokens, Stream& s) {
    std::string out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t len = std::min(tokens.size() - i, static_cast<std::size_t>(6 + s.next(5)));
        if (!out.empty()) out += ' ';
        for (std::size_t j = 0; j < len; ++j) {
            if (j) out += ' ';
            out += j == 0 ? capitalized(tokens[i + j]) : tokens[i + j];
        }
        out += '.';
        i += len;
    }
    return out;
}

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

}  // namespace

void PlantedCorpusSpec::validate() const {
    if (n_clusters == 0) throw ArgumentError("n_clusters must be positive");
    if (docs_per_cluster == 0) throw ArgumentError("docs_per_cluster must be positive");
    if (!(intra_cluster_vocab_overlap > 0.0 && intra_cluster_vocab_overlap <= 1.0))
        throw ArgumentError("intra_cluster_vocab_overlap must be in (0, 1]");
    if (embed_dim < 8) throw ArgumentError("embed_dim must be >= 8");
    if (n_clusters * 2 > embed_dim) throw ArgumentError("need at least two embedding buckets per cluster");
    if (tokens_per_doc < 8) throw ArgumentError("tokens_per_doc must be >= 8");
}

Corpus make_planted_corpus(const PlantedCorpusSpec& spec) {
    spec.validate();
    Stream s{mix(spec.seed, fnv1a64("planted-corpus"))};
    std::set<std::string> used;
    auto cluster_word = [&](std::size_t cluster) {
        for (;;) {
            std::string w = make_word(s);
            if (local_embed_bucket(w, spec.embed_dim) % spec.n_clusters != cluster) continue;
            if (used.insert(w).second) return w;
        }
    };

    constexpr std::size_t kCoreWords = 12, kPrivateWords = 8;
    std::vector<Document> docs;
    for (std::size_t c = 0; c < spec.n_clusters; ++c) {
        const std::string anchor = cluster_word(c);
        std::vector<std::string> core;
        for (std::size_t i = 0; i < kCoreWords; ++i) core.push_back(cluster_word(c));

        for (std::size_t d = 0; d < spec.docs_per_cluster; ++d) {
            std::vector<std::string> priv;
            for (std::size_t i = 0; i < kPrivateWords; ++i) priv.push_back(cluster_word(c));

            std::vector<std::string> tokens{anchor};
            while (tokens.size() < spec.tokens_per_doc) {
                if (s.uniform() < spec.intra_cluster_vocab_overlap) tokens.push_back(core[s.next(kCoreWords)]);
                else tokens.push_back(priv[s.next(kPrivateWords)]);
            }
            Document doc;
            doc.doc_id = fmt("c%02zu-d%03zu", c, d);
            doc.title = capitalized(core[s.next(kCoreWords)]) + " " + capitalized(priv[0]);
            doc.body = sentences(tokens, s);
            doc.char_count = doc.body.size();
            docs.push_back(std::move(doc));
        }
    }
    std::ostringstream desc;
    desc << "planted:" << spec.n_clusters << "x" << spec.docs_per_cluster << ",overlap=" << spec.intra_cluster_vocab_overlap
         << ",seed=" << spec.seed << ",dim=" << spec.embed_dim;
    return Corpus::from_documents(std::move(docs), "planted-" + std::to_string(spec.seed), desc.str());
}

std::size_t planted_cluster(const Document& doc) {
    std::size_t c = 0, d = 0;
    if (std::sscanf(doc.doc_id.c_str(), "c%zu-d%zu", &c, &d) != 2)
        throw ArgumentError("not a planted doc id: " + doc.doc_id);
    return c;
}

Corpus make_random_corpus(std::size_t n_docs, std::uint64_t seed, std::size_t vocab_size) {
    if (n_docs == 0) throw ArgumentError("n_docs must be positive");
    if (vocab_size < 10) throw ArgumentError("vocab_size must be >= 10");
    Stream s{mix(seed, fnv1a64("random-corpus"))};
    std::vector<std::string> vocab;
    std::set<std::string> seen;
    while (vocab.size() < vocab_size) {
        std::string w = make_word(s);
        if (seen.insert(w).second) vocab.push_back(w);
    }

    struct Draft {
        std::vector<std::string> title, body;
    };
    std::vector<Draft> drafts;
    std::set<std::string> titles;
    auto join_title = [](const std::vector<std::string>& words) {
        std::string t;
        for (const auto& w : words) t += (t.empty() ? "" : " ") + capitalized(w);
        return t;
    };
    while (drafts.size() < n_docs) {
        Draft d;
        if (!drafts.empty() && s.next(10) == 0) {
            // Same bag of tokens as an earlier document, so an identical vector.
            const Draft& src = drafts[s.next(drafts.size())];
            d.title = src.title;
            std::reverse(d.title.begin(), d.title.end());
            d.body = src.body;
            for (std::size_t i = d.body.size(); i > 1; --i) std::swap(d.body[i - 1], d.body[s.next(i)]);
        } else {
            const std::size_t tw = 2 + s.next(2), bw = 20 + s.next(41);
            for (std::size_t i = 0; i < tw; ++i) d.title.push_back(vocab[s.next(vocab_size)]);
            for (std::size_t i = 0; i < bw; ++i) d.body.push_back(vocab[s.next(vocab_size)]);
        }
        if (!titles.insert(join_title(d.title)).second) continue;
        drafts.push_back(std::move(d));
    }

    std::vector<Document> docs;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        Document doc;
        doc.doc_id = fmt("r%05zu", i);
        doc.title = join_title(drafts[i].title);
        doc.body = sentences(drafts[i].body, s);
        doc.char_count = doc.body.size();
        docs.push_back(std::move(doc));
    }
    return Corpus::from_documents(std::move(docs), "random-" + std::to_string(seed), "random");
}

DegradationProfile DegradationProfile::step(double p0, double p1, double cutoff) {
    DegradationProfile p{Kind::step, p0, p1, cutoff};
    p.validate();
    return p;
}

DegradationProfile DegradationProfile::exponential(double p0, double p1, double lambda) {
    DegradationProfile p{Kind::exponential_recovery, p0, p1, lambda};
    p.validate();
    return p;
}

DegradationProfile DegradationProfile::constant(double p0) {
    DegradationProfile p{Kind::constant, p0, p0, 1.0};
    p.validate();
    return p;
}

DegradationProfile DegradationProfile::parse(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw ArgumentError("profile must look like kind:params, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    std::vector<double> params;
    std::stringstream ss(text.substr(colon + 1));
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            params.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ArgumentError("bad profile parameter '" + part + "' in '" + text + "'");
        }
    }
    if (kind == "step" && params.size() == 3) return step(params[0], params[1], params[2]);
    if ((kind == "exp" || kind == "exponential" || kind == "exponential-recovery") && params.size() == 3)
        return exponential(params[0], params[1], params[2]);
    if (kind == "constant" && params.size() == 1) return constant(params[0]);
    throw ArgumentError("unknown profile '" + text + "' (step:p0,p1,r | exp:p0,p1,lambda | constant:p0)");
}

std::string DegradationProfile::to_string() const {
    auto f = [](double v) { return format_double(v); };
    switch (kind) {
        case Kind::step: return "step:" + f(p0) + "," + f(p1) + "," + f(scale);
        case Kind::exponential_recovery: return "exp:" + f(p0) + "," + f(p1) + "," + f(scale);
        case Kind::constant: return "constant:" + f(p0);
    }
    return {};
}

void DegradationProfile::validate() const {
    if (!(p0 >= 0.0 && p0 <= 1.0) || !(p1 >= 0.0 && p1 <= 1.0))
        throw ArgumentError("profile accuracies must be in [0, 1]");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("profile scale must be positive");
}

double DegradationProfile::accuracy_at(std::size_t x) const {
    const double xd = static_cast<double>(x);
    switch (kind) {
        case Kind::step: return xd <= scale ? p1 : p0;
        case Kind::exponential_recovery: return p1 + (p0 - p1) * (1.0 - std::exp(-xd / scale));
        case Kind::constant: return p0;
    }
    return p0;
}

SimulatedProvider::SimulatedProvider(std::string id, DegradationProfile profile, std::uint64_t seed)
    : id_(std::move(id)), profile_(profile), seed_(seed) {
    profile_.validate();
}

std::string SimulatedProvider::answer(const MCQItem& item, const std::string&) const {
    const std::uint64_t key = mix(seed_, fnv1a64(item.item_id));
    const bool correct = unit_uniform(key) < profile_.accuracy_at(item.semantic_distance);
    const int idx = correct ? item.answer_index
                            : static_cast<int>((item.answer_index + 1 + bounded(key, 1, 3)) % 4);
    return std::string(1, static_cast<char>('A' + idx));
}

UniformRandomProvider::UniformRandomProvider(std::string id, std::uint64_t seed)
    : id_(std::move(id)), seed_(seed) {}

std::string UniformRandomProvider::answer(const MCQItem& item, const std::string&) const {
    return std::string(1, static_cast<char>('A' + bounded(mix(seed_, fnv1a64(item.item_id)), 2, 4)));
}

RippleDataset make_synthetic_dataset(const SyntheticDatasetSpec& spec) {
    if (spec.n_retrieve == 0 || spec.rank_step == 0 || spec.n_targets == 0 || spec.topics_per_rank == 0 ||
        spec.questions_per_topic == 0)
        throw ArgumentError("synthetic dataset sizes must be positive");
    RippleDataset ds;
    ds.dataset_id = spec.dataset_id;
    static const std::array<std::string, 4> kChoices = {"alpha", "bravo", "charlie", "delta"};
    for (std::size_t t = 0; t < spec.n_targets; ++t) {
        const std::string target = fmt("tgt%02zu", t);
        ds.targets.push_back({"target " + std::to_string(t), {target}, TopicResolution::free_text, {}});
        for (std::size_t r = 1; r <= spec.n_retrieve; r += spec.rank_step) {
            for (std::size_t k = 0; k < spec.topics_per_rank; ++k) {
                const std::string topic = target + "-" + fmt("r%04zu-k%03zu", r, k);
                for (std::size_t q = 0; q < spec.questions_per_topic; ++q) {
                    MCQItem it;
                    it.item_id = target + "/" + fmt("r%04zu/k%03zu", r, k) + "/q" + std::to_string(q);
                    it.target_qid = target;
                    it.topic = topic;
                    it.semantic_distance = r;
                    it.stem = "Synthetic question " + std::to_string(q) + " about " + topic + "?";
                    it.choices = kChoices;
                    it.answer_index = static_cast<int>(bounded(mix(spec.seed, fnv1a64(it.item_id)), 0, 4));
                    it.provenance.generator_model = "synthetic";
                    ds.items.push_back(std::move(it));
                }
            }
        }
    }
    std::sort(ds.items.begin(), ds.items.end(),
              [](const MCQItem& a, const MCQItem& b) { return a.item_id < b.item_id; });
    ds.config = {{"kind", "synthetic"},
                 {"n_retrieve", spec.n_retrieve},
                 {"rank_step", spec.rank_step},
                 {"n_targets", spec.n_targets},
                 {"topics_per_rank", spec.topics_per_rank},
                 {"questions_per_topic", spec.questions_per_topic},
                 {"seed", spec.seed}};
    ds.recompute_stats();
    return ds;
}

nlohmann::ordered_json RecoveryReport::to_json() const {
    nlohmann::ordered_json j;
    j["profile"] = profile;
    j["seed"] = seed;
    j["tolerance"] = tolerance;
    j["questions_per_bucket"] = questions_per_bucket;
    j["passed"] = passed;
    j["worst_distance"] = worst_distance;
    j["worst_error"] = worst_error;
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : points)
        j["points"].push_back({{"distance", p.distance},
                               {"planted", p.planted},
                               {"estimated", p.estimated},
                               {"abs_error", p.abs_error},
                               {"n_questions", p.n_questions}});
    return j;
}

RecoveryReport recovery_test(const DegradationProfile& profile, const RippleDataset& dataset,
                             std::size_t questions_per_bucket, double tolerance, std::uint64_t seed,
                             Bucketing bucketing, std::size_t concurrency) {
    profile.validate();
    if (!(tolerance >= 0.0)) throw ArgumentError("tolerance must be non-negative");
    if (questions_per_bucket == 0) throw ArgumentError("questions_per_bucket must be positive");
    if (dataset.items.empty()) throw PreconditionError("dataset is empty");

    std::map<std::size_t, std::size_t> per_bucket;
    std::map<std::tuple<std::string, std::string, std::size_t>, bool> occurrences;
    for (const auto& it : dataset.items) {
        ++per_bucket[bucketing.bucket_of(it.semantic_distance)];
        occurrences[{it.target_qid, it.topic, it.semantic_distance}] = true;
    }
    for (auto [b, n] : per_bucket)
        if (n < questions_per_bucket)
            throw PreconditionError("bucket at distance " + std::to_string(b) + " has " + std::to_string(n) +
                                    " questions, need " + std::to_string(questions_per_bucket));

    std::map<std::size_t, std::pair<double, std::size_t>> planted;
    for (const auto& [key, _] : occurrences) {
        auto& acc = planted[bucketing.bucket_of(std::get<2>(key))];
        acc.first += profile.planted_delta(std::get<2>(key));
        acc.second += 1;
    }

    SimulatedProvider base("base", DegradationProfile::constant(profile.p0), seed);
    SimulatedProvider edited("edited", profile, seed);
    EvalOptions opts;
    opts.concurrency = concurrency;
    auto curve = ripple_curve(evaluate(base, dataset, opts), evaluate(edited, dataset, opts), dataset, bucketing);

    RecoveryReport rep;
    rep.profile = profile.to_string();
    rep.seed = seed;
    rep.tolerance = tolerance;
    rep.questions_per_bucket = questions_per_bucket;
    rep.passed = true;
    for (const auto& p : curve.points) {
        const auto& [sum, n] = planted.at(p.distance);
        RecoveryPoint rp{p.distance, sum / static_cast<double>(n), p.mean_delta, 0.0, p.n_questions};
        rp.abs_error = std::abs(rp.estimated - rp.planted);
        if (rp.abs_error > tolerance) rep.passed = false;
        if (rep.points.empty() || rp.abs_error > rep.worst_error) {
            rep.worst_error = rp.abs_error;
            rep.worst_distance = rp.distance;
        }
        rep.points.push_back(rp);
    }
    return rep;
}

}  // namespace ripple::sim
