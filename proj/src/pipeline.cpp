#include "orange/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <spdlog/spdlog.h>

#include "orange/errors.hpp"
#include "orange/parallel.hpp"
#include "orange/prompts.hpp"

namespace orange {

using nlohmann::json;

void RunConfig::validate() const {
    validator.validate();
    coder.validate();
    limits.validate();
    if (parser.max_steps == 0) throw ConfigError("max_steps must be positive");
    if (workers == 0) throw ConfigError("workers must be positive");
    if (!log.empty() && !std::filesystem::exists(log)) throw ConfigError("log not found: " + log.string());
    if (!std::filesystem::is_directory(db_dir)) throw ConfigError("database directory not found: " + db_dir.string());
    if (out_dir.empty()) throw ConfigError("output directory not set");
}

std::filesystem::path RunConfig::effective_memory_dir() const {
    return memory_dir.empty() ? out_dir / "memory" : memory_dir;
}

json RunConfig::to_json() const {
    return {{"prompt_version", std::string(prompts::kPromptVersion)},
            {"history", std::string(to_string(history))},
            {"tau", validator.tau},
            {"shots", coder.shots},
            {"paths", coder.paths},
            {"temperature", coder.temperature},
            {"fallback_full_schema", coder.fallback_full_schema},
            {"schema_linking", coder.schema_linking},
            {"selection", coder.selection == DemoSelection::Random ? "random" : "ranked"},
            {"seed", coder.seed},
            {"retries", parser.retries},
            {"max_steps", parser.max_steps},
            {"timeout", limits.timeout_seconds},
            {"max_rows", limits.max_rows},
            {"log", log.string()},
            {"db_dir", db_dir.string()},
            {"memory_dir", memory_dir.string()},
            {"out_dir", out_dir.string()},
            {"majority_only", majority_only},
            {"translate", translate},
            {"workers", workers}};
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    c.history = history_mode_from_string(j.at("history").get<std::string>());
    c.validator.tau = j.at("tau").get<double>();
    c.coder.shots = j.at("shots").get<std::size_t>();
    c.coder.paths = j.at("paths").get<std::size_t>();
    c.coder.temperature = j.at("temperature").get<double>();
    c.coder.fallback_full_schema = j.at("fallback_full_schema").get<bool>();
    c.coder.schema_linking = j.at("schema_linking").get<bool>();
    c.coder.selection = j.at("selection").get<std::string>() == "random" ? DemoSelection::Random : DemoSelection::Ranked;
    c.coder.seed = j.at("seed").get<std::uint64_t>();
    c.parser.retries = j.at("retries").get<std::size_t>();
    c.parser.max_steps = j.at("max_steps").get<std::size_t>();
    c.limits.timeout_seconds = j.at("timeout").get<double>();
    c.limits.max_rows = j.at("max_rows").get<std::size_t>();
    c.parser.limits = c.limits;
    c.log = j.at("log").get<std::string>();
    c.db_dir = j.at("db_dir").get<std::string>();
    c.memory_dir = j.at("memory_dir").get<std::string>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.majority_only = j.at("majority_only").get<bool>();
    c.translate = j.at("translate").get<bool>();
    c.workers = j.at("workers").get<std::size_t>();
    c.coder.workers = c.workers;
    return c;
}

std::filesystem::path resolve_db_path(const std::filesystem::path& db_dir, const std::string& db_id) {
    for (const auto& p : {db_dir / (db_id + ".sqlite"), db_dir / (db_id + ".db"), db_dir / db_id / (db_id + ".sqlite")})
        if (std::filesystem::is_regular_file(p)) return p;
    throw ConfigError("no database file for " + db_id + " under " + db_dir.string());
}

std::size_t RunReport::total_units() const {
    std::size_t n = 0;
    for (const auto& [db, count] : memory_units) n += count;
    return n;
}

json RunReport::to_json() const {
    json per_task = json::array();
    for (const auto& t : tasks) {
        per_task.push_back({{"task_id", t.task_id},
                            {"db_id", t.db_id},
                            {"predicted_sql", t.predicted_sql},
                            {"candidates", t.candidates},
                            {"clusters", t.clusters},
                            {"units_inserted", t.units_inserted},
                            {"snapshot_size", t.snapshot_size},
                            {"memory_size", t.memory_size},
                            {"error", t.error}});
    }
    json ku = json::object();
    for (const auto& [db, k] : ku_counts) ku[db] = {{"average", k.average}, {"min", k.min}, {"max", k.max}};
    return {{"tasks", std::move(per_task)},
            {"eval", eval.to_json()},
            {"ku_counts", std::move(ku)},
            {"memory_units", memory_units},
            {"failed_tasks", failed_tasks}};
}

RunState::RunState(RunConfig cfg, Gateway& gateway) : cfg_(std::move(cfg)), gateway_(gateway) {}

DbContext& RunState::db(const std::string& db_id) {
    auto it = dbs_.find(db_id);
    if (it != dbs_.end()) return *it->second;
    const auto path = resolve_db_path(cfg_.db_dir, db_id);
    auto sidecar = path;
    sidecar.replace_extension(".descriptions.json");
    auto catalog = load_catalog(path, std::filesystem::exists(sidecar) ? std::optional(sidecar) : std::nullopt);
    MemoryHeader header;
    header.db_id = db_id;
    header.tau = cfg_.validator.tau;
    header.embed_model = gateway_.embed_model();
    auto memory = std::make_unique<Memory>(Memory::open(cfg_.effective_memory_dir() / (db_id + ".jsonl"), header));
    auto ctx = std::make_unique<DbContext>(DbContext{path, std::move(catalog), std::move(memory)});
    return *dbs_.emplace(db_id, std::move(ctx)).first->second;
}

void RunState::write_transcript(const std::string& task_id, const json& transcript) const {
    const auto dir = cfg_.out_dir / "transcripts";
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / (task_id + ".json"), std::ios::trunc);
    if (!out) throw IoError("cannot write transcript for " + task_id);
    out << transcript.dump(2) << '\n';
}

namespace {

json messages_to_json(const std::vector<ChatMessage>& messages) {
    json out = json::array();
    for (const auto& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
    return out;
}

json read_transcript(const RunState& state, const std::string& task_id) {
    const auto path = state.config().out_dir / "transcripts" / (task_id + ".json");
    if (!std::filesystem::exists(path)) return json::object();
    std::ifstream in(path);
    return json::parse(in);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

}  // namespace

std::size_t build_knowledge(const LogEntry& entry, RunState& state, json& transcript) {
    const auto& cfg = state.config();
    const auto& task = entry.task;
    auto& ctx = state.db(task.db_id);
    const auto partition = cluster_candidates(entry.candidates, ctx.path, cfg.limits, cfg.workers);

    std::vector<std::size_t> reps;
    for (const auto& c : partition.clusters)
        if (!c.is_error()) reps.push_back(c.representative);

    std::vector<std::optional<ParseTrace>> traces(reps.size());
    std::vector<std::string> failures(reps.size());
    parallel_for(reps.size(), cfg.workers, [&](std::size_t i) {
        try {
            traces[i] = decompose(entry.candidates.candidates[reps[i]].sql, ctx.catalog, task.evidence,
                                  state.gateway(), ctx.path, cfg.parser);
        } catch (const ParseError& e) {
            failures[i] = e.what();
        }
    });

    std::vector<KnowledgeUnit> pooled;
    auto& parser_log = transcript["parser"];
    if (!parser_log.is_array()) parser_log = json::array();
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (!traces[i]) {
            spdlog::warn("task {}: candidate {} contributes no knowledge: {}", task.task_id, reps[i], failures[i]);
            parser_log.push_back({{"candidate_index", reps[i]}, {"error", failures[i]}});
            continue;
        }
        parser_log.push_back({{"candidate_index", reps[i]},
                              {"conversation_id", traces[i]->conversation_id},
                              {"steps", traces[i]->steps.size()},
                              {"messages", messages_to_json(traces[i]->transcript)}});
        auto units = units_from_trace(*traces[i], task, reps[i]);
        pooled.insert(pooled.end(), std::make_move_iterator(units.begin()), std::make_move_iterator(units.end()));
    }

    auto kept = score_and_filter(dedup(pooled), partition, cfg.validator);
    if (kept.empty()) return 0;
    std::vector<std::string> questions;
    for (const auto& u : kept) questions.push_back(u.question);
    const auto embeddings = state.gateway().embed_batch(questions);
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].embedding = embeddings[i];
    return ctx.memory->insert(kept);
}

TaskResult process_task(const LogEntry& entry, RunState& state) {
    const auto& cfg = state.config();
    const auto& task = entry.task;
    TaskResult result;
    result.task_id = task.task_id;
    result.db_id = task.db_id;
    result.candidates = entry.candidates.candidates.size();
    auto& ctx = state.db(task.db_id);

    if (cfg.majority_only) {
        const auto partition = cluster_candidates(entry.candidates, ctx.path, cfg.limits, cfg.workers);
        result.clusters = partition.clusters.size();
        if (!entry.candidates.candidates.empty()) {
            std::size_t chosen = 0;
            try {
                chosen = vote(partition);
            } catch (const NoValidResult&) {
            }
            result.predicted_sql = entry.candidates.candidates[chosen].sql;
        }
        result.memory_size = ctx.memory->size();
        return result;
    }

    json transcript = cfg.history == HistoryMode::All ? read_transcript(state, task.task_id) : json::object();
    transcript["task_id"] = task.task_id;
    if (cfg.history != HistoryMode::All) result.units_inserted = build_knowledge(entry, state, transcript);

    if (cfg.translate) {
        const auto view = ctx.memory->snapshot(cfg.history, task);
        result.snapshot_size = view.size();
        const auto tr = translate(task, view, ctx.catalog, cfg.coder, state.gateway(), ctx.path, cfg.limits);
        result.predicted_sql = tr.sql;
        result.clusters = tr.partition.clusters.size();
        json paths = json::array();
        for (const auto& c : tr.paths.candidates) paths.push_back(c.sql);
        json demos = json::array();
        for (std::size_t i = 0; i < tr.demos.demos.size(); ++i)
            demos.push_back({{"unit_id", tr.demos.demos[i].unit_id}, {"similarity", tr.demos.similarities[i]}});
        transcript["coder"] = {{"prompt", tr.prompt}, {"demos", std::move(demos)}, {"paths", std::move(paths)},
                               {"chosen", tr.sql}};
    }
    result.memory_size = ctx.memory->size();
    state.write_transcript(task.task_id, transcript);
    return result;
}

RunReport run(const RunConfig& cfg, Gateway& gateway) {
    cfg.validate();
    return run(load_log(cfg.log), cfg, gateway);
}

RunReport run(const std::vector<LogEntry>& entries, const RunConfig& cfg_in, Gateway& gateway) {
    RunConfig cfg = cfg_in;
    cfg.parser.limits = cfg.limits;
    cfg.coder.workers = cfg.workers;
    cfg.validator.validate();
    cfg.coder.validate();
    cfg.limits.validate();
    for (const auto& e : entries) resolve_db_path(cfg.db_dir, e.task.db_id);

    std::filesystem::create_directories(cfg.out_dir / "transcripts");
    std::filesystem::create_directories(cfg.effective_memory_dir());
    write_text(cfg.out_dir / "config.json", cfg.to_json().dump(2) + "\n");

    RunState state(cfg, gateway);
    RunReport report;
    std::map<std::string, std::string> build_errors;
    if (cfg.history == HistoryMode::All && !cfg.majority_only) {
        for (const auto& e : entries) {
            json transcript{{"task_id", e.task.task_id}};
            try {
                build_knowledge(e, state, transcript);
            } catch (const Error& err) {
                build_errors[e.task.task_id] = err.what();
                spdlog::error("task {}: knowledge build failed: {}", e.task.task_id, err.what());
            }
            state.write_transcript(e.task.task_id, transcript);
        }
    }

    std::vector<EvalRecord> eval_records;
    std::ofstream predictions(cfg.out_dir / "predictions.jsonl", std::ios::trunc);
    for (const auto& e : entries) {
        TaskResult r;
        try {
            r = process_task(e, state);
        } catch (const Error& err) {
            r.task_id = e.task.task_id;
            r.db_id = e.task.db_id;
            r.candidates = e.candidates.candidates.size();
            r.error = err.what();
            spdlog::error("task {}: {}", e.task.task_id, err.what());
        }
        if (auto it = build_errors.find(e.task.task_id); it != build_errors.end() && r.error.empty())
            r.error = "knowledge build: " + it->second;
        if (!r.error.empty()) ++report.failed_tasks;
        if (cfg.translate) {
            predictions << json{{"task_id", r.task_id}, {"db_id", r.db_id}, {"sql", r.predicted_sql}}.dump() << '\n';
            if (e.task.gold_sql) {
                const auto db = resolve_db_path(cfg.db_dir, e.task.db_id);
                const auto ex = execution_accuracy(r.predicted_sql, *e.task.gold_sql, db, cfg.limits);
                eval_records.push_back({r.task_id, r.db_id, r.predicted_sql, *e.task.gold_sql, ex.ex, ex.gold_valid,
                                        ex.prediction_error, e.task.difficulty});
            }
        }
        report.tasks.push_back(std::move(r));
    }
    predictions.close();

    report.eval = summarize(std::move(eval_records));
    std::map<std::string, std::vector<std::size_t>> sizes;
    for (const auto& t : report.tasks) sizes[t.db_id].push_back(t.snapshot_size);
    for (const auto& [db, v] : sizes) {
        KuCount k;
        k.min = *std::min_element(v.begin(), v.end());
        k.max = *std::max_element(v.begin(), v.end());
        double sum = 0.0;
        for (auto s : v) sum += static_cast<double>(s);
        k.average = sum / static_cast<double>(v.size());
        report.ku_counts[db] = k;
        try {
            report.memory_units[db] = state.db(db).memory->size();
        } catch (const Error&) {
            report.memory_units[db] = 0;
        }
    }
    write_text(cfg.out_dir / "report.json", report.to_json().dump(2) + "\n");
    return report;
}

}  // namespace orange
