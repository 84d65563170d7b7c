#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrkit/cache.hpp"
#include "rrkit/corpus.hpp"
#include "rrkit/embedder.hpp"
#include "rrkit/errors.hpp"
#include "rrkit/index.hpp"
#include "rrkit/losses.hpp"
#include "rrkit/metrics.hpp"
#include "rrkit/pipeline.hpp"
#include "rrkit/throughput.hpp"
#include "rrkit/tokenizer.hpp"

namespace {

using namespace rrkit;

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct EmbedderFlags {
    std::string kind = "toy";
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    std::string endpoint;
    std::string cache_path;
    std::size_t batch_size = 128;

    void attach(CLI::App* cmd) {
        cmd->add_option("--embedder", kind, "Embedding provider: toy, remote, or cached")
            ->check(CLI::IsMember({"toy", "remote", "cached"}))
            ->capture_default_str();
        cmd->add_option("--dim", dim, "Embedding dimension")->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for the toy embedder")->capture_default_str();
        cmd->add_option("--endpoint", endpoint,
                        "Remote embedding endpoint (RRKIT_EMBED_ENDPOINT overrides)");
        cmd->add_option("--cache-path", cache_path, "Cache file for the cached embedder");
        cmd->add_option("--batch-size", batch_size, "Texts per embedding call")
            ->capture_default_str();
    }

    EmbedderSpec spec() const {
        EmbedderSpec s;
        s.kind = kind == "remote"   ? EmbedderKind::Remote
                 : kind == "cached" ? EmbedderKind::Cached
                                    : EmbedderKind::Toy;
        s.dim = dim;
        s.seed = seed;
        s.endpoint = endpoint;
        s.cache_path = cache_path;
        s.batch_size = batch_size;
        return s;
    }
};

std::unordered_map<std::string, std::vector<std::string>> tokenize_corpus(
    const std::vector<Document>& docs, const Tokenizer& tok) {
    std::unordered_map<std::string, std::vector<std::string>> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        out.emplace(d.id, tok.tokenize(d.text));
    }
    return out;
}

std::string query_embed_text(const Query& q) {
    return q.task_definition ? instruct_query(*q.task_definition, q.text) : q.text;
}

int cmd_ingest(const std::string& corpus_path, const std::string& out_path, std::size_t chunk_size,
               std::size_t overlap) {
    const auto docs = ingest(corpus_path);
    ChunkConfig cfg{chunk_size, overlap};
    WhitespaceTokenizer tok;
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open output: " + out_path);
    }
    std::size_t total_chunks = 0;
    for (const auto& doc : docs) {
        for (const auto& c : chunk(doc.id, tok.tokenize(doc.text), cfg)) {
            nlohmann::json j;
            j["doc_id"] = c.doc_id;
            j["chunk_index"] = c.chunk_index;
            j["token_start"] = c.token_start;
            j["token_end"] = c.token_end;
            out << j.dump() << '\n';
            ++total_chunks;
        }
    }
    std::cout << "docs " << docs.size() << "\nchunks " << total_chunks << '\n';
    return 0;
}

int cmd_embed(const std::string& corpus_path, const std::string& out_path,
              const EmbedderFlags& eflags) {
    const auto docs = ingest(corpus_path);
    if (docs.empty()) {
        throw InvalidInput("embed: corpus is empty");
    }
    const auto embed = make_embedder(eflags.spec());
    std::vector<std::string> ids, texts;
    ids.reserve(docs.size());
    texts.reserve(docs.size());
    for (const auto& d : docs) {
        ids.push_back(d.id);
        texts.push_back(d.text);
    }
    const auto vectors = embed(texts);
    cache_write(out_path, ids, vectors, eflags.dim);
    std::cout << "embedded " << ids.size() << '\n';
    return 0;
}

int cmd_index(const std::string& cache_path, const std::string& out_path) {
    const auto data = cache_read(cache_path);
    if (data.dim == 0) {
        throw InvalidInput("index: cache declares dimension 0");
    }
    VectorIndex index(data.dim);
    for (std::size_t i = 0; i < data.ids.size(); ++i) {
        index.add(data.ids[i], data.embeddings[i]);
    }
    index.save(out_path);
    std::cout << "indexed " << index.size() << '\n';
    return 0;
}

int cmd_search(const std::string& index_path, const std::string& queries_path,
               const std::string& out_path, std::size_t k, std::size_t workers,
               const std::string& tag, const EmbedderFlags& eflags) {
    const auto index = VectorIndex::load(index_path);
    const auto queries = load_queries(queries_path);
    if (queries.empty()) {
        throw InvalidInput("search: no queries");
    }
    const auto embed = make_embedder(eflags.spec());
    std::vector<std::string> texts;
    texts.reserve(queries.size());
    for (const auto& q : queries) {
        texts.push_back(query_embed_text(q));
    }
    const auto vectors = embed(texts);
    const auto hits = index.top_k_batch(vectors, k, workers);

    RunFile run;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<RunEntry> ranking;
        ranking.reserve(hits[i].size());
        for (const auto& h : hits[i]) {
            ranking.push_back({h.doc_id, h.score});
        }
        run.set_ranking(queries[i].id, std::move(ranking));
    }
    run.to_file(out_path, tag);
    std::cout << "searched " << queries.size() << '\n';
    return 0;
}

int cmd_rerank(const std::string& run_path, const std::string& queries_path,
               const std::string& corpus_path, const std::string& out_path, std::size_t k,
               const std::string& reranker_name, std::size_t max_query_tokens,
               const std::string& tag) {
    const auto run = RunFile::from_file(run_path);
    WhitespaceTokenizer tok;

    RunFile out;
    if (reranker_name == "identity") {
        // passthrough scorer: keeps retrieval scores and order on the top k
        for (const auto& [qid, ranking] : run.by_query()) {
            std::vector<RunEntry> head(
                ranking.begin(),
                ranking.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranking.size())));
            out.set_ranking(qid, std::move(head));
        }
    } else {
        const auto queries = load_queries(queries_path);
        std::map<std::string, const Query*> by_id;
        for (const auto& q : queries) {
            by_id[q.id] = &q;
        }
        const auto docs = ingest(corpus_path);
        const MapTokenStore store(tokenize_corpus(docs, tok));
        const OverlapReranker reranker;
        for (const auto& [qid, ranking] : run.by_query()) {
            const auto it = by_id.find(qid);
            if (it == by_id.end()) {
                throw InvalidInput("rerank: query \"" + qid + "\" missing from " + queries_path);
            }
            const auto qtokens = truncate_query(tok.tokenize(it->second->text), max_query_tokens);
            std::vector<ScoredHit> scored;
            for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
                scored.push_back(
                    {ranking[i].doc_id, reranker.score(qtokens, store.tokens(ranking[i].doc_id))});
            }
            std::sort(scored.begin(), scored.end(), [](const ScoredHit& a, const ScoredHit& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.doc_id < b.doc_id;
            });
            std::vector<RunEntry> ranking_out;
            ranking_out.reserve(scored.size());
            for (const auto& h : scored) {
                ranking_out.push_back({h.doc_id, h.score});
            }
            out.set_ranking(qid, std::move(ranking_out));
        }
    }
    out.to_file(out_path, tag);
    std::cout << "reranked " << out.by_query().size() << '\n';
    return 0;
}

int cmd_mine(const std::string& queries_path, const std::string& qrels_path,
             const std::string& index_path, const std::string& corpus_path,
             const std::string& out_path, double margin, std::size_t retrieve_k, std::size_t keep_n,
             std::size_t max_query_tokens, const EmbedderFlags& eflags) {
    const auto queries = load_queries(queries_path);
    const auto qrels = Qrels::from_file(qrels_path);
    const auto index = VectorIndex::load(index_path);
    const auto docs = ingest(corpus_path);
    WhitespaceTokenizer tok;
    const MapTokenStore store(tokenize_corpus(docs, tok));
    const OverlapReranker reranker;
    const auto embed = make_embedder(eflags.spec());

    MiningConfig cfg;
    cfg.margin = margin;
    cfg.retrieve_k = retrieve_k;
    cfg.keep_n = keep_n;
    cfg.max_query_tokens = max_query_tokens;

    // queries with a positive judgment, embedded in one batched call
    std::vector<const Query*> judged;
    std::vector<std::string> positives;
    std::vector<std::string> texts;
    for (const auto& q : queries) {
        if (!qrels.has_query(q.id) || qrels.total_relevance(q.id) == 0) continue;
        // positive: highest grade, smallest doc id on ties
        std::string positive;
        int best = 0;
        for (const auto& [doc, grade] : qrels.by_query().at(q.id)) {
            if (grade > best) {
                best = grade;
                positive = doc;
            }
        }
        judged.push_back(&q);
        positives.push_back(std::move(positive));
        texts.push_back(query_embed_text(q));
    }

    std::vector<MinedNegatives> records;
    if (!judged.empty()) {
        const auto vectors = embed(texts);
        for (std::size_t i = 0; i < judged.size(); ++i) {
            const auto qtokens = tok.tokenize(judged[i]->text);
            auto negatives = mine_hard_negatives(vectors[i], qtokens, positives[i], index, reranker,
                                                 store, cfg);
            records.push_back({judged[i]->id, positives[i], std::move(negatives)});
        }
    }
    write_mined_negatives(out_path, records);
    std::cout << "mined " << records.size() << '\n';
    return 0;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path, std::size_t ndcg_k,
             std::size_t recall_k, std::size_t match_k, const std::string& out_path) {
    const auto run = RunFile::from_file(run_path);
    const auto qrels = Qrels::from_file(qrels_path);

    const auto ndcg = ndcg_at_k(run, qrels, ndcg_k);
    const auto recall = recall_at_k(run, qrels, recall_k);
    const auto match = match_at_k(run, qrels, match_k);
    const auto acc = accuracy_at_1(run, qrels);

    std::cout << "NDCG@" << ndcg_k << ": " << fmt(ndcg.value) << '\n'
              << "Recall@" << recall_k << ": " << fmt(recall.value) << '\n'
              << "Match@" << match_k << ": " << fmt(match.value) << '\n'
              << "Accuracy@1: " << fmt(acc.value) << '\n'
              << "evaluated: " << ndcg.evaluated << '\n'
              << "skipped: " << ndcg.skipped << '\n';

    if (!out_path.empty()) {
        nlohmann::json j;
        j["ndcg"] = {{"k", ndcg_k}, {"value", ndcg.value}};
        j["recall"] = {{"k", recall_k}, {"value", recall.value}};
        j["match"] = {{"k", match_k}, {"value", match.value}};
        j["accuracy_at_1"] = {{"value", acc.value}};
        j["evaluated"] = ndcg.evaluated;
        j["skipped"] = ndcg.skipped;
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) {
            throw IoError("cannot open output: " + out_path);
        }
        out << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_bench(const std::string& corpus_path, const std::string& out_path, std::size_t chunk_size,
              std::size_t overlap, std::size_t repeats, const std::string& baseline_path,
              const EmbedderFlags& eflags) {
    const auto docs = ingest(corpus_path);
    ThroughputConfig cfg;
    cfg.chunking = ChunkConfig{chunk_size, overlap};
    cfg.batch_size = eflags.batch_size;
    cfg.repeats = repeats;
    const auto report = measure_throughput(docs, make_embedder(eflags.spec()), cfg);

    std::cout << "total_docs " << report.total_docs << '\n'
              << "total_chunks " << report.total_chunks << '\n'
              << "docs_per_second " << fmt(report.docs_per_second) << '\n';
    for (const auto& rep : report.repeats) {
        std::cout << "repeat wall_seconds=" << fmt(rep.wall_seconds)
                  << (rep.ok ? "" : " failed=\"" + rep.error + "\"") << '\n';
    }
    if (!baseline_path.empty()) {
        std::ifstream base_in(baseline_path);
        if (!base_in) {
            throw IoError("cannot open baseline report: " + baseline_path);
        }
        const std::string text((std::istreambuf_iterator<char>(base_in)),
                               std::istreambuf_iterator<char>());
        const auto baseline = report_from_json(text);
        std::cout << "baseline_docs_per_second " << fmt(baseline.docs_per_second) << '\n'
                  << "relative_speed_of_baseline "
                  << format_relative_speed(baseline.docs_per_second, report.docs_per_second)
                  << '\n';
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) {
            throw IoError("cannot open output: " + out_path);
        }
        out << report_to_json(report) << '\n';
    }
    return 0;
}

int cmd_loss(const std::string& input_path, const std::string& out_path) {
    std::ifstream in(input_path);
    if (!in) {
        throw IoError("cannot open loss input: " + input_path);
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind")) {
        throw ParseError("loss input must be a JSON object with a \"kind\" field");
    }
    const std::string kind = j.at("kind").get<std::string>();
    nlohmann::json out;
    out["kind"] = kind;

    if (kind == "contrastive") {
        TrainingBatch batch;
        for (const auto& q : j.at("queries")) {
            batch.queries.push_back(Embedding{q.get<std::vector<double>>()});
        }
        for (const auto& plist : j.at("passages")) {
            std::vector<Embedding> passages;
            for (const auto& p : plist) {
                passages.push_back(Embedding{p.get<std::vector<double>>()});
            }
            batch.passages.push_back(std::move(passages));
        }
        ContrastiveConfig cfg;
        cfg.tau = j.value("tau", cfg.tau);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.beta = j.value("beta", cfg.beta);
        cfg.gamma = j.value("gamma", cfg.gamma);
        const auto res = contrastive_loss(batch, cfg);
        out["value"] = res.value;
        out["per_query"] = res.per_query;
        out["grad_queries"] = res.grad_queries;
        out["grad_passages"] = res.grad_passages;
    } else if (kind == "distillation") {
        const auto student = j.at("student").get<std::vector<std::vector<double>>>();
        const auto teacher = j.at("teacher").get<std::vector<std::vector<double>>>();
        const auto res = distillation_loss(student, teacher, j.value("tau_kd", 1.0));
        out["value"] = res.value;
        out["per_query"] = res.per_query;
        out["grad_student"] = res.grad_student;
    } else if (kind == "plistmle") {
        const auto scores = j.at("scores").get<std::vector<double>>();
        const auto order = j.at("order").get<std::vector<std::size_t>>();
        const auto res = plistmle_loss(scores, order);
        out["value"] = res.value;
        out["grad_scores"] = res.grad_scores;
    } else {
        throw InvalidConfig("loss: unknown kind \"" + kind +
                            "\" (expected contrastive, distillation, or plistmle)");
    }

    const std::string dumped = out.dump(2);
    if (out_path.empty()) {
        std::cout << dumped << '\n';
    } else {
        std::ofstream o(out_path, std::ios::trunc);
        if (!o) {
            throw IoError("cannot open output: " + out_path);
        }
        o << dumped << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval and reranking toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flags from an INI-style config file");

    auto* ingest_cmd = app.add_subcommand("ingest", "Chunk a corpus into a manifest");
    std::string in_corpus, in_out;
    std::size_t in_chunk = 512, in_overlap = 100;
    ingest_cmd->add_option("--corpus", in_corpus, "Line-delimited {id, text} corpus")->required();
    ingest_cmd->add_option("--out", in_out, "Chunk manifest output path")->required();
    ingest_cmd->add_option("--chunk-size", in_chunk, "Tokens per chunk")->capture_default_str();
    ingest_cmd->add_option("--overlap", in_overlap, "Token overlap between chunks")
        ->capture_default_str();

    auto* embed_cmd = app.add_subcommand("embed", "Embed a corpus into a cache file");
    std::string em_corpus, em_out;
    EmbedderFlags em_flags;
    embed_cmd->add_option("--corpus", em_corpus, "Corpus path")->required();
    embed_cmd->add_option("--out", em_out, "Cache output path")->required();
    em_flags.attach(embed_cmd);

    auto* index_cmd = app.add_subcommand("index", "Validate a cache into an index file");
    std::string ix_cache, ix_out;
    index_cmd->add_option("--cache", ix_cache, "Embedding cache path")->required();
    index_cmd->add_option("--out", ix_out, "Index output path")->required();

    auto* search_cmd = app.add_subcommand("search", "Run queries against an index");
    std::string se_index, se_queries, se_out, se_tag = "rrkit";
    std::size_t se_k = 20, se_workers = 4;
    EmbedderFlags se_flags;
    search_cmd->add_option("--index", se_index, "Index path")->required();
    search_cmd->add_option("--queries", se_queries, "Queries path")->required();
    search_cmd->add_option("--out", se_out, "Run file output path")->required();
    search_cmd->add_option("--k", se_k, "Results per query")->capture_default_str();
    search_cmd->add_option("--workers", se_workers, "Parallel query workers")
        ->capture_default_str();
    search_cmd->add_option("--tag", se_tag, "Run tag")->capture_default_str();
    se_flags.attach(search_cmd);

    auto* rerank_cmd = app.add_subcommand("rerank", "Rescore the head of a run file");
    std::string rr_run, rr_queries, rr_corpus, rr_out, rr_name = "overlap", rr_tag = "rrkit";
    std::size_t rr_k = 20, rr_qtokens = 64;
    rerank_cmd->add_option("--run", rr_run, "Input run file")->required();
    rerank_cmd->add_option("--queries", rr_queries, "Queries path");
    rerank_cmd->add_option("--corpus", rr_corpus, "Corpus path (token source)");
    rerank_cmd->add_option("--out", rr_out, "Output run file")->required();
    rerank_cmd->add_option("--k", rr_k, "Candidates to rerank per query")->capture_default_str();
    rerank_cmd->add_option("--reranker", rr_name, "Reranker: overlap or identity")
        ->check(CLI::IsMember({"overlap", "identity"}))
        ->capture_default_str();
    rerank_cmd->add_option("--max-query-tokens", rr_qtokens, "Query truncation length")
        ->capture_default_str();
    rerank_cmd->add_option("--tag", rr_tag, "Run tag")->capture_default_str();

    auto* mine_cmd = app.add_subcommand("mine", "Mine hard negatives for judged queries");
    std::string mi_queries, mi_qrels, mi_index, mi_corpus, mi_out;
    double mi_margin = 0.95;
    std::size_t mi_retrieve = 20, mi_keep = 8, mi_qtokens = 64;
    EmbedderFlags mi_flags;
    mine_cmd->add_option("--queries", mi_queries, "Queries path")->required();
    mine_cmd->add_option("--qrels", mi_qrels, "Qrels path")->required();
    mine_cmd->add_option("--index", mi_index, "Index path")->required();
    mine_cmd->add_option("--corpus", mi_corpus, "Corpus path (token source)")->required();
    mine_cmd->add_option("--out", mi_out, "Mined negatives output path")->required();
    mine_cmd->add_option("--margin", mi_margin, "False-negative filter margin")
        ->capture_default_str();
    mine_cmd->add_option("--retrieve-k", mi_retrieve, "Candidates to retrieve")
        ->capture_default_str();
    mine_cmd->add_option("--keep", mi_keep, "Negatives to keep per query")->capture_default_str();
    mine_cmd->add_option("--max-query-tokens", mi_qtokens, "Query truncation length")
        ->capture_default_str();
    mi_flags.attach(mine_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "Score a run against qrels");
    std::string ev_run, ev_qrels, ev_out;
    std::size_t ev_ndcg = 10, ev_recall = 5, ev_match = 5;
    eval_cmd->add_option("--run", ev_run, "Run file")->required();
    eval_cmd->add_option("--qrels", ev_qrels, "Qrels file")->required();
    eval_cmd->add_option("--ndcg-k", ev_ndcg, "NDCG cutoff")->capture_default_str();
    eval_cmd->add_option("--recall-k", ev_recall, "Recall cutoff")->capture_default_str();
    eval_cmd->add_option("--match-k", ev_match, "Match cutoff")->capture_default_str();
    eval_cmd->add_option("--out", ev_out, "Metric report JSON output path");

    auto* bench_cmd = app.add_subcommand("bench", "Measure ingestion throughput");
    std::string be_corpus, be_out, be_baseline;
    std::size_t be_chunk = 512, be_overlap = 100, be_repeats = 3;
    EmbedderFlags be_flags;
    bench_cmd->add_option("--corpus", be_corpus, "Corpus path")->required();
    bench_cmd->add_option("--out", be_out, "Report JSON output path");
    bench_cmd->add_option("--chunk-size", be_chunk, "Tokens per chunk")->capture_default_str();
    bench_cmd->add_option("--overlap", be_overlap, "Token overlap")->capture_default_str();
    bench_cmd->add_option("--repeats", be_repeats, "Timed repeats")->capture_default_str();
    bench_cmd->add_option("--baseline", be_baseline, "Baseline report to compare against");
    be_flags.attach(bench_cmd);

    auto* loss_cmd = app.add_subcommand("loss", "Evaluate a loss batch file");
    std::string lo_in, lo_out;
    loss_cmd->add_option("--input", lo_in, "Loss batch JSON")->required();
    loss_cmd->add_option("--out", lo_out, "Dump output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[invalid-config]: " << e.what() << '\n';
        return 2;
    }

    try {
        if (app.got_subcommand(ingest_cmd)) {
            return cmd_ingest(in_corpus, in_out, in_chunk, in_overlap);
        }
        if (app.got_subcommand(embed_cmd)) {
            return cmd_embed(em_corpus, em_out, em_flags);
        }
        if (app.got_subcommand(index_cmd)) {
            return cmd_index(ix_cache, ix_out);
        }
        if (app.got_subcommand(search_cmd)) {
            return cmd_search(se_index, se_queries, se_out, se_k, se_workers, se_tag, se_flags);
        }
        if (app.got_subcommand(rerank_cmd)) {
            if (rr_name != "identity" && (rr_corpus.empty() || rr_queries.empty())) {
                throw InvalidConfig("rerank: --corpus and --queries are required for the overlap reranker");
            }
            return cmd_rerank(rr_run, rr_queries, rr_corpus, rr_out, rr_k, rr_name, rr_qtokens,
                              rr_tag);
        }
        if (app.got_subcommand(mine_cmd)) {
            return cmd_mine(mi_queries, mi_qrels, mi_index, mi_corpus, mi_out, mi_margin,
                            mi_retrieve, mi_keep, mi_qtokens, mi_flags);
        }
        if (app.got_subcommand(eval_cmd)) {
            return cmd_eval(ev_run, ev_qrels, ev_ndcg, ev_recall, ev_match, ev_out);
        }
        if (app.got_subcommand(bench_cmd)) {
            return cmd_bench(be_corpus, be_out, be_chunk, be_overlap, be_repeats, be_baseline,
                             be_flags);
        }
        if (app.got_subcommand(loss_cmd)) {
            return cmd_loss(lo_in, lo_out);
        }
        std::cerr << "error[invalid-config]: no subcommand\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error[" << e.code() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 1;
    }
}
