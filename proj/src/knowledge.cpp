#include "orange/knowledge.hpp"

#include "orange/errors.hpp"
#include "orange/sql_text.hpp"

namespace orange {

using nlohmann::json;

std::string KnowledgeUnit::identity() const { return sql::normalize(sql) + "\n" + exec_fingerprint.digest; }

std::string make_unit_id(const std::string& db_id, const std::string& sql_text, const ResultFingerprint& fp) {
    return sha256_hex(db_id + "\n" + sql::normalize(sql_text) + "\n" + fp.digest).substr(0, 16);
}

json value_to_json(const Value& v) {
    struct Visitor {
        json operator()(std::monostate) const { return nullptr; }
        json operator()(std::int64_t i) const { return i; }
        json operator()(double d) const { return d; }
        json operator()(const std::string& s) const { return s; }
        json operator()(const Blob& b) const { return json{{"blob", b.bytes}}; }
    };
    return std::visit(Visitor{}, v);
}

Value value_from_json(const json& j) {
    if (j.is_null()) return std::monostate{};
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_object() && j.contains("blob")) return Blob{j.at("blob").get<std::vector<std::uint8_t>>()};
    throw MemoryError("unsupported stored value " + j.dump());
}

json rows_to_json(const std::vector<Row>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        json r = json::array();
        for (const auto& v : row) r.push_back(value_to_json(v));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Row> rows_from_json(const json& j) {
    std::vector<Row> rows;
    for (const auto& r : j) {
        Row row;
        for (const auto& v : r) row.push_back(value_from_json(v));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const ResultFingerprint& fp) {
    return {{"digest", fp.digest},
            {"is_error", fp.is_error},
            {"error_class", std::string(to_string(fp.error_class))},
            {"null_like", fp.null_like}};
}

ResultFingerprint fingerprint_from_json(const json& j) {
    ResultFingerprint fp;
    fp.digest = j.at("digest").get<std::string>();
    fp.is_error = j.at("is_error").get<bool>();
    fp.error_class = error_class_from_string(j.at("error_class").get<std::string>());
    fp.null_like = j.value("null_like", false);
    return fp;
}

json to_json(const KnowledgeUnit& u) {
    return {{"unit_id", u.unit_id},
            {"db_id", u.db_id},
            {"question", u.question},
            {"sql", u.sql},
            {"reasoning", u.reasoning},
            {"exec_preview", rows_to_json(u.exec_preview)},
            {"exec_fingerprint", to_json(u.exec_fingerprint)},
            {"probability", u.probability},
            {"embedding", u.embedding},
            {"provenance",
             {{"task_id", u.provenance.task_id},
              {"task_sequence_index", u.provenance.task_sequence_index},
              {"candidate_index", u.provenance.candidate_index},
              {"step_index", u.provenance.step_index}}},
            {"inserted_at", u.inserted_at}};
}

KnowledgeUnit unit_from_json(const json& j) {
    KnowledgeUnit u;
    u.unit_id = j.at("unit_id").get<std::string>();
    u.db_id = j.at("db_id").get<std::string>();
    u.question = j.at("question").get<std::string>();
    u.sql = j.at("sql").get<std::string>();
    u.reasoning = j.at("reasoning").get<std::string>();
    u.exec_preview = rows_from_json(j.at("exec_preview"));
    u.exec_fingerprint = fingerprint_from_json(j.at("exec_fingerprint"));
    u.probability = j.at("probability").get<double>();
    u.embedding = j.at("embedding").get<Embedding>();
    const auto& p = j.at("provenance");
    u.provenance.task_id = p.at("task_id").get<std::string>();
    u.provenance.task_sequence_index = p.at("task_sequence_index").get<std::size_t>();
    u.provenance.candidate_index = p.at("candidate_index").get<std::size_t>();
    u.provenance.step_index = p.at("step_index").get<std::size_t>();
    u.inserted_at = j.at("inserted_at").get<std::uint64_t>();
    return u;
}

}  // namespace orange
