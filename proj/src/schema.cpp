#include "orange/schema.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <sqlite3.h>

#include "orange/errors.hpp"
#include "orange/sql_text.hpp"
#include "sqlite_handle.hpp"

namespace orange {

std::string SchemaItem::key() const { return to_lower(id); }

std::string SchemaItem::table_name() const {
    if (kind == ItemKind::Table) return id;
    return id.substr(0, id.find('.'));
}

std::string SchemaItem::column_name() const {
    if (kind == ItemKind::Table) return {};
    return id.substr(id.find('.') + 1);
}

SchemaSubset SchemaSubset::of(std::initializer_list<std::string_view> ids) {
    SchemaSubset s;
    for (auto id : ids) s.insert(id);
    return s;
}

void SchemaSubset::insert(std::string_view id) { ids.insert(to_lower(id)); }

SchemaCatalog::SchemaCatalog(std::string db_id, std::vector<SchemaItem> items, std::vector<ForeignKey> fks)
    : db_id_(std::move(db_id)), items_(std::move(items)), foreign_keys_(std::move(fks)) {
    std::set<std::string> seen;
    bool any_table = false;
    for (const auto& item : items_) {
        if (!seen.insert(item.key()).second) throw CatalogError("duplicate schema item " + item.id);
        if (item.kind == ItemKind::Table) {
            any_table = true;
        } else if (!seen.count(to_lower(item.table_name()))) {
            throw CatalogError("column " + item.id + " precedes or lacks its table");
        }
    }
    if (!any_table) throw CatalogError("catalog " + db_id_ + " has no tables");
    for (const auto& fk : foreign_keys_) {
        if (!seen.count(to_lower(fk.column)) || !seen.count(to_lower(fk.references)))
            throw CatalogError("foreign key " + fk.column + " -> " + fk.references + " has a missing endpoint");
    }
}

const SchemaItem* SchemaCatalog::find(std::string_view id) const {
    for (const auto& item : items_)
        if (iequals(item.id, id)) return &item;
    return nullptr;
}

const SchemaItem* SchemaCatalog::find_table(std::string_view table) const {
    const auto* item = find(table);
    return item && item->kind == ItemKind::Table ? item : nullptr;
}

const SchemaItem* SchemaCatalog::find_column(std::string_view table, std::string_view column) const {
    std::string id(table);
    id.push_back('.');
    id.append(column);
    return find(id);
}

std::vector<const SchemaItem*> SchemaCatalog::tables() const {
    std::vector<const SchemaItem*> out;
    for (const auto& item : items_)
        if (item.kind == ItemKind::Table) out.push_back(&item);
    return out;
}

std::vector<const SchemaItem*> SchemaCatalog::columns_of(std::string_view table) const {
    std::vector<const SchemaItem*> out;
    for (const auto& item : items_)
        if (item.kind == ItemKind::Column && iequals(item.table_name(), table)) out.push_back(&item);
    return out;
}

SchemaSubset SchemaCatalog::closure(const SchemaSubset& subset) const {
    SchemaSubset out;
    for (const auto& item : items_) {
        const bool table_selected = subset.all || subset.ids.count(to_lower(item.table_name()));
        if (table_selected || subset.ids.count(item.key())) {
            out.ids.insert(item.key());
            out.ids.insert(to_lower(item.table_name()));
        }
    }
    return out;
}

bool SchemaCatalog::operator==(const SchemaCatalog& other) const {
    auto same_item = [](const SchemaItem& a, const SchemaItem& b) {
        return a.id == b.id && a.kind == b.kind && a.column_type == b.column_type &&
               a.description == b.description;
    };
    auto same_fk = [](const ForeignKey& a, const ForeignKey& b) {
        return a.column == b.column && a.references == b.references;
    };
    return db_id_ == other.db_id_ &&
           std::equal(items_.begin(), items_.end(), other.items_.begin(), other.items_.end(), same_item) &&
           std::equal(foreign_keys_.begin(), foreign_keys_.end(), other.foreign_keys_.begin(),
                      other.foreign_keys_.end(), same_fk);
}

namespace {

std::string column_text(sqlite3_stmt* stmt, int col) {
    const auto* p = sqlite3_column_text(stmt, col);
    return p ? reinterpret_cast<const char*>(p) : std::string{};
}

std::map<std::string, std::string> read_descriptions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot read column descriptions " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw CatalogError("malformed column descriptions " + path.string() + ": " + e.what());
    }
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : doc.items())
        if (value.is_string()) out[to_lower(key)] = value.get<std::string>();
    return out;
}

}  // namespace

SchemaCatalog load_catalog(const std::filesystem::path& db_path,
                           const std::optional<std::filesystem::path>& descriptions) {
    if (!std::filesystem::is_regular_file(db_path))
        throw CatalogError("no database file at " + db_path.string());
    std::map<std::string, std::string> notes;
    if (descriptions) notes = read_descriptions(*descriptions);

    detail::Connection conn;
    try {
        conn = detail::Connection::open_read_only(db_path);
    } catch (const Error& e) {
        throw CatalogError(e.what());
    }

    std::vector<std::string> table_names;
    {
        auto stmt = conn.prepare(
            "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
        if (!stmt) throw CatalogError(db_path.string() + ": " + conn.last_error());
        int rc;
        while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) table_names.push_back(column_text(stmt.get(), 0));
        if (rc != SQLITE_DONE) throw CatalogError(db_path.string() + ": " + conn.last_error());
    }
    if (table_names.empty()) throw CatalogError(db_path.string() + " has no user tables");

    std::vector<SchemaItem> items;
    struct RawFk {
        std::string table, from, to_table, to;
    };
    std::vector<RawFk> raw_fks;
    for (const auto& table : table_names) {
        items.push_back({table, ItemKind::Table, {}, {}});
        auto cols = conn.prepare("SELECT name, type FROM pragma_table_info(?1) ORDER BY cid");
        sqlite3_bind_text(cols.get(), 1, table.c_str(), -1, SQLITE_TRANSIENT);
        while (sqlite3_step(cols.get()) == SQLITE_ROW) {
            SchemaItem col{table + "." + column_text(cols.get(), 0), ItemKind::Column,
                           column_text(cols.get(), 1), {}};
            if (auto it = notes.find(col.key()); it != notes.end()) col.description = it->second;
            items.push_back(std::move(col));
        }
        auto fks = conn.prepare(
            "SELECT \"table\", \"from\", \"to\" FROM pragma_foreign_key_list(?1) ORDER BY id, seq");
        sqlite3_bind_text(fks.get(), 1, table.c_str(), -1, SQLITE_TRANSIENT);
        while (sqlite3_step(fks.get()) == SQLITE_ROW)
            raw_fks.push_back({table, column_text(fks.get(), 1), column_text(fks.get(), 0), column_text(fks.get(), 2)});
    }

    std::vector<ForeignKey> fks;
    auto find_item = [&](const std::string& id) -> const SchemaItem* {
        for (const auto& item : items)
            if (iequals(item.id, id)) return &item;
        return nullptr;
    };
    for (const auto& raw : raw_fks) {
        std::string target = raw.to;
        if (target.empty()) {
            // Implicit reference to the parent's primary key.
            auto pk = conn.prepare("SELECT name FROM pragma_table_info(?1) WHERE pk = 1");
            sqlite3_bind_text(pk.get(), 1, raw.to_table.c_str(), -1, SQLITE_TRANSIENT);
            if (sqlite3_step(pk.get()) == SQLITE_ROW) target = column_text(pk.get(), 0);
        }
        const auto* from = find_item(raw.table + "." + raw.from);
        const auto* to = find_item(raw.to_table + "." + target);
        if (!from || !to) {
            spdlog::warn("{}: skipping foreign key {}.{} -> {}.{} with a missing endpoint",
                         db_path.filename().string(), raw.table, raw.from, raw.to_table, target);
            continue;
        }
        fks.push_back({from->id, to->id});
    }
    return SchemaCatalog(db_path.stem().string(), std::move(items), std::move(fks));
}

std::string render_schema(const SchemaCatalog& catalog, const SchemaSubset& subset) {
    for (const auto& id : subset.ids)
        if (!catalog.find(id)) throw SubsetError("unknown schema item " + id);
    const SchemaSubset chosen = catalog.closure(subset);

    std::string out;
    for (const auto* table : catalog.tables()) {
        if (!chosen.ids.count(table->key())) continue;
        out += "CREATE TABLE " + table->id + " (\n";
        std::vector<std::string> lines;
        for (const auto* col : catalog.columns_of(table->id)) {
            if (!chosen.ids.count(col->key())) continue;
            std::string line = "  " + col->column_name();
            if (!col->column_type.empty()) line += " " + col->column_type;
            if (!col->description.empty()) line += " -- " + collapse_whitespace(col->description);
            lines.push_back(std::move(line));
        }
        for (const auto& fk : catalog.foreign_keys()) {
            const auto* from = catalog.find(fk.column);
            if (!iequals(from->table_name(), table->id)) continue;
            if (!chosen.ids.count(to_lower(fk.column)) || !chosen.ids.count(to_lower(fk.references))) continue;
            const auto* to = catalog.find(fk.references);
            lines.push_back("  FOREIGN KEY (" + from->column_name() + ") REFERENCES " + to->table_name() + "(" +
                            to->column_name() + ")");
        }
        for (std::size_t i = 0; i < lines.size(); ++i) {
            out += lines[i];
            // A trailing comment would swallow the separator, so it goes before "--".
            if (i + 1 < lines.size()) {
                const auto dash = lines[i].find(" -- ");
                if (dash != std::string::npos) out.insert(out.size() - (lines[i].size() - dash), ",");
                else out += ",";
            }
            out += "\n";
        }
        out += ");\n";
    }
    return out;
}

}  // namespace orange
