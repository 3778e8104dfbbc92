#include "fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

namespace tabcheck::fixtures {

namespace {

struct Geo {
    const char* city;
    const char* state;
    const char* country;
    const char* region;
    const char* market;
    double lat;
    double lon;
};

constexpr std::array kGeo{
    Geo{"Providence", "Rhode Island", "United States", "East of USA", "USCA", 41.8, -71.4},
    Geo{"Concord", "New Hampshire", "United States", "East of USA", "USCA", 43.2, -71.5},
    Geo{"Seattle", "Washington", "United States", "West of USA", "USCA", 47.6, -122.3},
    Geo{"Lancaster", "California", "United States", "West of USA", "USCA", 34.7, -118.1},
    Geo{"Porirua", "Wellington", "New Zealand", "Oceania", "Pacific Asia", -41.1, 174.8},
    Geo{"Tokio", "Tokyo", "Japan", "Eastern Asia", "Pacific Asia", 35.7, 139.7},
    Geo{"Nagpur", "Maharashtra", "India", "South Asia", "Pacific Asia", 21.1, 79.1},
    Geo{"Manila", "Capital Nacional", "Filipinas", "Southeast Asia", "Pacific Asia", 14.6, 121.0},
    Geo{"Tegucigalpa", "Francisco Morazan", "Honduras", "Central America", "LATAM", 14.1, -87.2},
    Geo{"Puebla", "Puebla", "Mexico", "Central America", "LATAM", 19.0, -98.2},
    Geo{"Culiacan", "Sinaloa", "Mexico", "Central America", "LATAM", 24.8, -107.4},
    Geo{"Ciego de Avila", "Ciego de Avila", "Cuba", "Caribbean", "LATAM", 21.8, -78.8},
    Geo{"Munich", "Bavaria", "Germany", "Western Europe", "Europe", 48.1, 11.6},
    Geo{"Aachen", "North Rhine-Westphalia", "Germany", "Western Europe", "Europe", 50.8, 6.1},
    Geo{"Reims", "Alsace-Champagne-Ardenne-Lorraine", "France", "Western Europe", "Europe", 49.3, 4.0},
    Geo{"Vitoria", "Basque Country", "Spain", "Southern Europe", "Europe", 42.8, -2.7},
    Geo{"Cuneo", "Piedmont", "Italy", "Southern Europe", "Europe", 44.4, 7.5},
    Geo{"Nacka", "Stockholm", "Sweden", "Northern Europe", "Europe", 59.3, 18.2},
    Geo{"Grodno", "Grodno", "Belarus", "Eastern Europe", "Europe", 53.7, 23.8},
    Geo{"Bugia", "Buja", "Argelia", "North Africa", "Africa", 36.8, 5.1},
};

struct Product {
    const char* name;
    const char* category;
    const char* department;
    double price;
};

constexpr std::array kProducts{
    Product{"Field Trainer Jersey", "Cleats", "Apparel", 49.98},
    Product{"Perfect Fitness Rip Deck", "Cleats", "Apparel", 59.99},
    Product{"Running Shoe", "Cardio Equipment", "Footwear", 99.99},
    Product{"Trail Shoe", "Cardio Equipment", "Footwear", 129.99},
    Product{"Fishing Cooler", "Fishing", "Fan Shop", 199.99},
    Product{"Camping Tent", "Camping & Hiking", "Fan Shop", 299.98},
    Product{"Pelican Kayak", "Water Sports", "Fan Shop", 399.98},
    Product{"Smart Watch", "Electronics", "Technology", 327.75},
    Product{"Golf Glove", "Golf Gloves", "Golf", 24.99},
    Product{"Golf Bag", "Golf Bags & Carts", "Golf", 17.99},
    Product{"Treadmill", "Fitness Accessories", "Fitness", 1999.99},
    Product{"Yoga Mat", "Fitness Accessories", "Fitness", 9.99},
};

struct Customer {
    const char* city;
    const char* state;
};

constexpr std::array kCustomers{
    Customer{"Caguas", "PR"},       Customer{"Chicago", "IL"},     Customer{"Los Angeles", "CA"},
    Customer{"Brooklyn", "NY"},     Customer{"Houston", "TX"},     Customer{"Philadelphia", "PA"},
    Customer{"San Diego", "CA"},    Customer{"Detroit", "MI"},     Customer{"Phoenix", "AZ"},
};

constexpr std::array kSegments{"Consumer", "Corporate", "Home Office"};
constexpr std::array kShipping{"Standard Class", "Second Class", "First Class", "Same Day"};
constexpr std::array kStatus{"COMPLETE", "PENDING", "PROCESSING", "CLOSED", "ON_HOLD"};
constexpr std::array kPayment{"DEBIT", "TRANSFER", "CASH", "PAYMENT"};
constexpr std::array kDelivery{"Advance shipping", "Late delivery", "Shipping on time"};
constexpr std::array kRates{0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.09, 0.1, 0.12, 0.13, 0.15, 0.16, 0.17,
                            0.18, 0.2, 0.25};

constexpr const char* kDateFormat = "DD/MM/YYYY hh:mm:ss";

Schema fixture_schema() {
    std::vector<Column> cols;
    const auto cat = [&](const char* n) { cols.push_back({n, ColumnKind::Categorical, std::nullopt}); };
    const auto integer = [&](const char* n) { cols.push_back({n, ColumnKind::Integer, std::nullopt}); };
    const auto real = [&](const char* n) { cols.push_back({n, ColumnKind::Real, std::nullopt}); };
    for (const char* n : {"order_city", "order_state", "order_country", "order_region", "market", "product_name",
                          "category_name", "department_name", "customer_segment", "customer_city",
                          "customer_state", "shipping_mode", "order_status", "payment_type", "delivery_status"}) {
        cat(n);
    }
    integer("quantity");
    real("product_price");
    real("discount_rate");
    real("discount_value");
    real("original_price");
    real("sales_price");
    real("benefit_per_order");
    real("profit_ratio");
    integer("days_shipping_real");
    integer("days_shipping_scheduled");
    integer("late_delivery_risk");
    real("latitude");
    real("longitude");
    integer("customer_id");
    integer("order_id");
    integer("order_item_id");
    integer("product_id");
    integer("category_id");
    integer("department_id");
    real("sales_per_customer");
    real("order_item_total");
    real("shipping_cost");
    real("weight_kg");
    real("customer_score");
    cols.push_back({"order_date", ColumnKind::Datetime, kDateFormat});
    cols.push_back({"delivery_date", ColumnKind::Datetime, kDateFormat});
    return Schema(std::move(cols));
}

}  // namespace

Table order_fixture(std::size_t rows, std::uint64_t seed) {
    Table t(fixture_schema());
    std::mt19937_64 rng(seed);
    const auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::int64_t start = 1'420'070'400LL * kMicrosPerSecond;  // 2015-01-01

    for (std::size_t r = 0; r < rows; ++r) {
        const Geo& g = kGeo[pick(kGeo.size())];
        const std::size_t pi = pick(kProducts.size());
        const Product& p = kProducts[pi];
        const std::size_t ci = pick(kCustomers.size());
        const Customer& c = kCustomers[ci];

        const std::int64_t quantity = static_cast<std::int64_t>(1 + pick(5));
        const double rate = kRates[pick(kRates.size())];
        const double original = static_cast<double>(quantity) * p.price;
        const double discount = original * rate;
        const double sales = original - discount;
        const double z = gauss(rng);
        const double profit_ratio = 0.1 + 0.2 * z / 3.0;
        const std::int64_t scheduled = static_cast<std::int64_t>(pick(5));
        const std::int64_t real_days = std::max<std::int64_t>(0, scheduled + static_cast<std::int64_t>(pick(4)) - 1);
        const std::int64_t order_micros =
            start + static_cast<std::int64_t>(pick(3 * 365 * 24 * 60)) * 60 * kMicrosPerSecond;
        const std::int64_t delivery_micros = order_micros + (real_days + 1) * kMicrosPerDay +
                                             static_cast<std::int64_t>(pick(3600)) * kMicrosPerSecond;

        Row row;
        row.emplace_back(std::string(g.city));
        row.emplace_back(std::string(g.state));
        row.emplace_back(std::string(g.country));
        row.emplace_back(std::string(g.region));
        row.emplace_back(std::string(g.market));
        row.emplace_back(std::string(p.name));
        row.emplace_back(std::string(p.category));
        row.emplace_back(std::string(p.department));
        row.emplace_back(std::string(kSegments[pick(kSegments.size())]));
        row.emplace_back(std::string(c.city));
        row.emplace_back(std::string(c.state));
        row.emplace_back(std::string(kShipping[pick(kShipping.size())]));
        row.emplace_back(std::string(kStatus[pick(kStatus.size())]));
        row.emplace_back(std::string(kPayment[pick(kPayment.size())]));
        row.emplace_back(std::string(kDelivery[pick(kDelivery.size())]));
        row.emplace_back(quantity);
        row.emplace_back(p.price);
        row.emplace_back(rate);
        row.emplace_back(discount);
        row.emplace_back(original);
        row.emplace_back(sales);
        row.emplace_back(sales * profit_ratio);
        row.emplace_back(profit_ratio);
        row.emplace_back(real_days);
        row.emplace_back(scheduled);
        row.emplace_back(static_cast<std::int64_t>(real_days > scheduled ? 1 : 0));
        row.emplace_back(g.lat + 0.05 * gauss(rng));
        row.emplace_back(g.lon + 0.05 * gauss(rng));
        row.emplace_back(static_cast<std::int64_t>(1000 + ci * 97 + pick(50)));
        row.emplace_back(static_cast<std::int64_t>(70000 + r / 3));
        row.emplace_back(static_cast<std::int64_t>(180000 + r));
        row.emplace_back(static_cast<std::int64_t>(100 + pi));
        row.emplace_back(static_cast<std::int64_t>(10 + pi / 2));
        row.emplace_back(static_cast<std::int64_t>(2 + pi / 3));
        row.emplace_back(sales * (1.0 + 0.3 * std::fabs(gauss(rng))));
        row.emplace_back(original);
        row.emplace_back(4.0 + 2.0 * static_cast<double>(quantity) + std::fabs(gauss(rng)));
        row.emplace_back(0.5 * static_cast<double>(quantity) + 0.2 * std::fabs(gauss(rng)));
        row.emplace_back(50.0 + 10.0 * z + 5.0 * gauss(rng));
        row.emplace_back(Timestamp{order_micros});
        row.emplace_back(Timestamp{delivery_micros});
        t.append(std::move(row));
    }
    return t;
}

RuleSet order_rules(const Schema& schema, double tolerance) {
    RuleSet rs;
    rs.groups.push_back(
        make_group("geo", {"order_city", "order_state", "order_country", "order_region", "market"}, schema));
    rs.groups.push_back(make_group("product", {"product_name", "category_name", "department_name"}, schema));
    rs.groups.push_back(make_group("customer", {"customer_city", "customer_state"}, schema));
    rs.rules.push_back(make_rule("original_price", "original_price ~= quantity * product_price", schema, tolerance));
    rs.rules.push_back(make_rule("discount_value", "discount_value ~= original_price * discount_rate", schema,
                                 tolerance));
    rs.rules.push_back(make_rule("sales_price", "sales_price ~= original_price - discount_value", schema, tolerance));
    rs.rules.push_back(make_rule("temporal", "order_date < delivery_date", schema, tolerance));
    return rs;
}

void write_fixture_files(const std::filesystem::path& dir, const Table& table, const std::string& name) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "schema.txt");
        out << schema_to_text(table.schema());
    }
    {
        std::ofstream out(dir / "rules.ini");
        out << "[group geo]\ncolumns = order_city, order_state, order_country, order_region, market\n\n"
               "[group product]\ncolumns = product_name, category_name, department_name\n\n"
               "[group customer]\ncolumns = customer_city, customer_state\n\n"
               "[rule original_price]\nexpr = original_price ~= quantity * product_price\n\n"
               "[rule discount_value]\nexpr = discount_value ~= original_price * discount_rate\n\n"
               "[rule sales_price]\nexpr = sales_price ~= original_price - discount_value\n\n"
               "[rule temporal]\nexpr = order_date < delivery_date\n";
    }
    save_table(dir / name, table);
}

std::filesystem::path scratch_dir(const std::string& tag) {
    static std::size_t counter = 0;
    std::random_device rd;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("tabcheck-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace tabcheck::fixtures
