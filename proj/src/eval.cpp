#include "orange/eval.hpp"

#include <fstream>

#include "orange/errors.hpp"
#include "orange/pipeline.hpp"

namespace orange {

using nlohmann::json;

ExOutcome execution_accuracy(std::string_view predicted, std::string_view gold, const std::filesystem::path& db_path,
                             const ExecLimits& limits) {
    ExOutcome out;
    const auto gold_result = execute(db_path, gold, limits);
    if (is_error(gold_result)) {
        out.gold_valid = false;
        return out;
    }
    const auto pred_result = execute(db_path, predicted, limits);
    if (is_error(pred_result)) {
        out.prediction_error = std::get<ExecError>(pred_result).error_class;
        if (out.prediction_error == ErrorClass::None) out.prediction_error = ErrorClass::Runtime;
        return out;
    }
    out.ex = fingerprint(pred_result) == fingerprint(gold_result) ? 1 : 0;
    return out;
}

EvalReport summarize(std::vector<EvalRecord> tasks) {
    EvalReport r;
    r.tasks = std::move(tasks);
    std::size_t hits = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_tag;
    for (const auto& t : r.tasks) {
        if (!t.gold_valid) {
            ++r.invalid_gold;
            continue;
        }
        ++r.scored;
        hits += static_cast<std::size_t>(t.ex);
        if (t.difficulty) {
            auto& [n, h] = by_tag[*t.difficulty];
            ++n;
            h += static_cast<std::size_t>(t.ex);
        }
    }
    r.ex = r.scored ? static_cast<double>(hits) / static_cast<double>(r.scored) : 0.0;
    for (const auto& [tag, nh] : by_tag)
        r.ex_by_difficulty[tag] = static_cast<double>(nh.second) / static_cast<double>(nh.first);
    return r;
}

json EvalReport::to_json() const {
    json per_task = json::array();
    for (const auto& t : tasks) {
        json j{{"task_id", t.task_id}, {"db_id", t.db_id}, {"predicted_sql", t.predicted_sql},
               {"gold_sql", t.gold_sql}, {"ex", t.ex}, {"gold_valid", t.gold_valid},
               {"error_class", std::string(to_string(t.error_class))}};
        if (t.difficulty) j["difficulty"] = *t.difficulty;
        per_task.push_back(std::move(j));
    }
    return {{"ex", ex}, {"scored", scored}, {"invalid_gold", invalid_gold}, {"ex_by_difficulty", ex_by_difficulty},
            {"tasks", std::move(per_task)}};
}

EvalReport evaluate(const std::vector<LogEntry>& entries, const std::map<std::string, std::string>& predictions,
                    const std::filesystem::path& db_dir, const ExecLimits& limits) {
    std::vector<EvalRecord> records;
    for (const auto& e : entries) {
        const auto& t = e.task;
        if (!t.gold_sql) continue;
        EvalRecord rec{t.task_id, t.db_id, "", *t.gold_sql, 0, true, ErrorClass::None, t.difficulty};
        const auto db = resolve_db_path(db_dir, t.db_id);
        const auto it = predictions.find(t.task_id);
        if (it == predictions.end()) {
            rec.gold_valid = !is_error(execute(db, *t.gold_sql, limits));
            rec.error_class = ErrorClass::Runtime;
        } else {
            rec.predicted_sql = it->second;
            const auto ex = execution_accuracy(it->second, *t.gold_sql, db, limits);
            rec.ex = ex.ex;
            rec.gold_valid = ex.gold_valid;
            rec.error_class = ex.prediction_error;
        }
        records.push_back(std::move(rec));
    }
    return summarize(std::move(records));
}

std::map<std::string, std::string> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read predictions " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            out[j.at("task_id").get<std::string>()] = j.at("sql").get<std::string>();
        } catch (const json::exception& e) {
            throw LogFormatError(lineno, e.what());
        }
    }
    return out;
}

}  // namespace orange
