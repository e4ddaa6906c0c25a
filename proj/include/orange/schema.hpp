#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace orange {

enum class ItemKind { Table, Column };

/// One addressable schema element: a table ("atom") or a column ("atom.molecule_id").
/// `id` keeps the database's spelling; `key()` is the case-folded form used for lookup.
struct SchemaItem {
    std::string id;
    ItemKind kind = ItemKind::Table;
    std::string column_type;   // columns only
    std::string description;   // empty when none supplied

    std::string key() const;
    std::string table_name() const;   // table part of the id
    std::string column_name() const;  // empty for table items
};

struct ForeignKey {
    std::string column;      // "atom.molecule_id"
    std::string references;  // "molecule.molecule_id"
};

/// Item ids to render. `all` overrides `ids`. Ids are compared case-insensitively.
struct SchemaSubset {
    bool all = false;
    std::set<std::string> ids;  // case-folded keys

    static SchemaSubset everything() { return {true, {}}; }
    static SchemaSubset of(std::initializer_list<std::string_view> ids);
    void insert(std::string_view id);
    bool empty() const { return !all && ids.empty(); }
    bool operator==(const SchemaSubset&) const = default;
};

/// Immutable description of a database's base tables, columns and foreign keys.
class SchemaCatalog {
public:
    SchemaCatalog(std::string db_id, std::vector<SchemaItem> items, std::vector<ForeignKey> fks);

    const std::string& db_id() const { return db_id_; }
    const std::vector<SchemaItem>& items() const { return items_; }
    const std::vector<ForeignKey>& foreign_keys() const { return foreign_keys_; }

    const SchemaItem* find(std::string_view id) const;
    const SchemaItem* find_table(std::string_view table) const;
    const SchemaItem* find_column(std::string_view table, std::string_view column) const;
    std::vector<const SchemaItem*> tables() const;
    std::vector<const SchemaItem*> columns_of(std::string_view table) const;

    /// Closure of `subset` under "a table implies its columns, a column implies its table".
    SchemaSubset closure(const SchemaSubset& subset) const;

    bool operator==(const SchemaCatalog& other) const;

private:
    std::string db_id_;
    std::vector<SchemaItem> items_;
    std::vector<ForeignKey> foreign_keys_;
};

/// Reads base tables, columns, declared types and foreign keys of a SQLite file.
/// Descriptions come from an optional JSON sidecar mapping "table.column" to text.
/// Throws CatalogError when the file is unreadable, not a database, or has no tables.
SchemaCatalog load_catalog(const std::filesystem::path& db_path,
                           const std::optional<std::filesystem::path>& descriptions = std::nullopt);

/// DDL-like rendering of the tables touched by `subset`, each with exactly its
/// selected columns, plus foreign keys whose endpoints are both rendered.
/// Throws SubsetError on unknown ids.
std::string render_schema(const SchemaCatalog& catalog, const SchemaSubset& subset);

}  // namespace orange
