#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "tabcheck/rules.hpp"
#include "tabcheck/table.hpp"

namespace tabcheck::fixtures {

/// Order table shaped like a retail supply-chain export: geographic,
/// product and customer hierarchies, exact financial identities, ordered
/// order/delivery dates and correlated numeric columns. 41 columns: 15
/// categorical, 24 integer/real, 2 datetime. No Nulls.
Table order_fixture(std::size_t rows, std::uint64_t seed);

/// Groups geo/product/customer and rules original_price, discount_value,
/// sales_price, temporal, all satisfied by every order_fixture row.
RuleSet order_rules(const Schema& schema, double tolerance = 0.01);

/// Schema, rule file and table written as <dir>/{schema.txt,rules.ini,<name>}.
void write_fixture_files(const std::filesystem::path& dir, const Table& table, const std::string& name);

/// Unique empty directory under the system temp directory.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace tabcheck::fixtures
