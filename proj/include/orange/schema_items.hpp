#pragma once

#include <string_view>

#include "orange/schema.hpp"

namespace orange {

/// Every table and column a SELECT statement touches, resolved to catalog ids.
///
/// Tables come from FROM/JOIN items (aliases and CTE names resolved); columns
/// from every expression position, including correlated subqueries, `*` and
/// `alias.*`. Names that resolve to nothing in the catalog (select-list aliases,
/// derived-table columns, double-quoted strings) are skipped.
///
/// Throws ExtractError when the text does not tokenize, has unbalanced
/// parentheses, or is not a query.
SchemaSubset extract_schema_items(std::string_view sql, const SchemaCatalog& catalog);

}  // namespace orange
