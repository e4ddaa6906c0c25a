#include "orange/fixtures.hpp"

#include <array>
#include <fstream>
#include <random>
#include <variant>

#include <nlohmann/json.hpp>

#include "orange/errors.hpp"
#include "orange/log_store.hpp"
#include "sqlite_handle.hpp"

namespace orange {
namespace {

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) {
        std::filesystem::remove(path);
        conn_ = detail::Connection::open_read_write(path);
        conn_.exec("PRAGMA journal_mode = DELETE; BEGIN");
    }
    ~Writer() = default;

    void exec(const std::string& sql) { conn_.exec(sql); }

    void insert(const std::string& table, const std::vector<Cell>& cells) {
        std::string sql = "INSERT INTO " + table + " VALUES (";
        for (std::size_t i = 0; i < cells.size(); ++i) sql += i ? ", ?" : "?";
        sql += ")";
        auto stmt = conn_.prepare(sql);
        if (!stmt) throw IoError("fixture insert failed: " + conn_.last_error());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const int idx = static_cast<int>(i + 1);
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::monostate>) sqlite3_bind_null(stmt.get(), idx);
                    else if constexpr (std::is_same_v<T, std::int64_t>) sqlite3_bind_int64(stmt.get(), idx, v);
                    else if constexpr (std::is_same_v<T, double>) sqlite3_bind_double(stmt.get(), idx, v);
                    else sqlite3_bind_text(stmt.get(), idx, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
                },
                cells[i]);
        }
        if (sqlite3_step(stmt.get()) != SQLITE_DONE) throw IoError("fixture insert failed: " + conn_.last_error());
    }

    void commit() { conn_.exec("COMMIT"); }

private:
    detail::Connection conn_;
};

std::string pad3(int i) {
    std::string s = std::to_string(i);
    return std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
}

void build_toxicology(const std::filesystem::path& path) {
    Writer w(path);
    w.exec(
        "CREATE TABLE molecule (molecule_id TEXT PRIMARY KEY, label TEXT);"
        "CREATE TABLE atom (atom_id TEXT PRIMARY KEY, molecule_id TEXT REFERENCES molecule(molecule_id), element TEXT);"
        "CREATE TABLE bond (bond_id TEXT PRIMARY KEY, molecule_id TEXT REFERENCES molecule(molecule_id), bond_type TEXT);"
        "CREATE TABLE connected (atom_id TEXT REFERENCES atom(atom_id), atom_id2 TEXT REFERENCES atom(atom_id), "
        "bond_id TEXT REFERENCES bond(bond_id), PRIMARY KEY (atom_id, atom_id2));");
    std::mt19937 rng(20240501);
    static const std::array<const char*, 6> kElements = {"c", "h", "o", "n", "cl", "s"};
    static const std::array<const char*, 3> kBonds = {"-", "=", "#"};
    int negative_seen = 0;
    for (int m = 0; m < 30; ++m) {
        const std::string mid = "TR" + pad3(m);
        const bool carcinogenic = m % 3 == 0;
        w.insert("molecule", {mid, std::string(carcinogenic ? "+" : "-")});
        std::vector<std::string> elements;
        const int base = 4 + static_cast<int>(rng() % 5);
        for (int a = 0; a < base; ++a) elements.emplace_back(kElements[rng() % kElements.size()]);
        // 17 sodium atoms over the first ten non-carcinogenic molecules (seven of
        // them get two), six more over carcinogenic ones.
        if (!carcinogenic) {
            if (negative_seen < 10) elements.emplace_back("na");
            if (negative_seen < 7) elements.emplace_back("na");
            ++negative_seen;
        } else if (m < 18) {
            elements.emplace_back("na");
        }
        for (std::size_t a = 0; a < elements.size(); ++a)
            w.insert("atom", {mid + "_" + std::to_string(a + 1), mid, elements[a]});
        for (std::size_t a = 1; a < elements.size(); ++a) {
            const std::string bid = mid + "_" + std::to_string(a) + "_" + std::to_string(a + 1);
            w.insert("bond", {bid, mid, std::string(kBonds[rng() % kBonds.size()])});
            w.insert("connected", {mid + "_" + std::to_string(a), mid + "_" + std::to_string(a + 1), bid});
        }
    }
    w.commit();

    nlohmann::json desc{{"atom.element", "chemical element symbol in lowercase, e.g. 'na' for sodium"},
                        {"molecule.label", "'+' marks a carcinogenic molecule, '-' a non-carcinogenic one"},
                        {"bond.bond_type", "'-' single, '=' double, '#' triple bond"}};
    auto sidecar = path;
    sidecar.replace_extension(".descriptions.json");
    std::ofstream(sidecar) << desc.dump(2) << '\n';
}

void build_school(const std::filesystem::path& path) {
    Writer w(path);
    w.exec(
        "CREATE TABLE clubs (club_id INTEGER PRIMARY KEY, name TEXT, advisor TEXT);"
        "CREATE TABLE students (student_id INTEGER PRIMARY KEY, name TEXT, grade INTEGER, gpa REAL, "
        "club_id INTEGER REFERENCES clubs(club_id));"
        "CREATE TABLE courses (course_id INTEGER PRIMARY KEY, title TEXT, credits INTEGER);"
        "CREATE TABLE enrollments (student_id INTEGER REFERENCES students(student_id), "
        "course_id INTEGER REFERENCES courses(course_id), score REAL, PRIMARY KEY (student_id, course_id));");
    static const std::array<std::pair<const char*, const char*>, 5> kClubs = {
        {{"Chess", "Mr. Okafor"}, {"Robotics", "Ms. Lindqvist"}, {"Drama", "Mr. Haddad"}, {"Football", "Ms. Romero"},
         {"Music", "Mr. Nakamura"}}};
    for (std::size_t c = 0; c < kClubs.size(); ++c)
        w.insert("clubs", {static_cast<std::int64_t>(c + 1), std::string(kClubs[c].first), std::string(kClubs[c].second)});
    static const std::array<std::pair<const char*, std::int64_t>, 6> kCourses = {
        {{"Algebra", 4}, {"Chemistry", 5}, {"History", 2}, {"Literature", 3}, {"Art", 1}, {"Physics", 6}}};
    for (std::size_t c = 0; c < kCourses.size(); ++c)
        w.insert("courses", {static_cast<std::int64_t>(c + 1), std::string(kCourses[c].first), kCourses[c].second});

    static const std::array<const char*, 8> kFirst = {"Ava", "Noah", "Mia", "Liam", "Zoe", "Omar", "Ines", "Kai"};
    static const std::array<const char*, 5> kLast = {"Chen", "Garcia", "Novak", "Adeyemi", "Holm"};
    std::mt19937 rng(7);
    for (int s = 0; s < 40; ++s) {
        const std::string name = std::string(kFirst[s % 8]) + " " + kLast[s / 8];
        const auto grade = static_cast<std::int64_t>(9 + rng() % 4);
        const double gpa = static_cast<double>(200 + (s * 37) % 200) / 100.0;
        const auto club = rng() % 6;
        w.insert("students", {static_cast<std::int64_t>(s + 1), name, grade, gpa,
                              club == 0 ? Cell{} : Cell{static_cast<std::int64_t>(club)}});
        const int n_courses = 2 + static_cast<int>(rng() % 3);
        const auto first = rng() % kCourses.size();
        for (int k = 0; k < n_courses; ++k) {
            const auto course = static_cast<std::int64_t>((first + static_cast<std::size_t>(k)) % kCourses.size() + 1);
            const double score = 50.0 + static_cast<double>(rng() % 101) / 2.0;
            w.insert("enrollments", {static_cast<std::int64_t>(s + 1), course, score});
        }
    }
    w.commit();
}

void build_retail(const std::filesystem::path& path) {
    Writer w(path);
    w.exec(
        "CREATE TABLE customers (customer_id INTEGER PRIMARY KEY, name TEXT, city TEXT, segment TEXT);"
        "CREATE TABLE products (product_id INTEGER PRIMARY KEY, name TEXT, category TEXT, price REAL);"
        "CREATE TABLE orders (order_id INTEGER PRIMARY KEY, customer_id INTEGER REFERENCES customers(customer_id), "
        "order_date TEXT);"
        "CREATE TABLE order_items (order_id INTEGER REFERENCES orders(order_id), "
        "product_id INTEGER REFERENCES products(product_id), quantity INTEGER);");
    static const std::array<const char*, 5> kCities = {"Austin", "Boston", "Chicago", "Denver", "Seattle"};
    static const std::array<const char*, 25> kNames = {
        "Lena Park",    "Tom Becker",   "Ana Souza",     "Raj Iyer",     "Eva Novak",
        "Sam Ortiz",    "Hana Sato",    "Ben Osei",      "Lia Moreau",   "Dan Kowal",
        "Ivy Tran",     "Max Fischer",  "Nia Brooks",    "Leo Rossi",    "Amy Walsh",
        "Jon Berg",     "Una Kelly",    "Paz Medina",    "Ray Dubois",   "Kim Larsen",
        "Oli Grant",    "Sia Patel",    "Ted Moreno",    "Eli Sandoval", "Fay Lindgren"};
    std::mt19937 rng(99);
    for (std::size_t c = 0; c < kNames.size(); ++c)
        w.insert("customers", {static_cast<std::int64_t>(c + 1), std::string(kNames[c]),
                               std::string(kCities[rng() % kCities.size()]),
                               std::string(rng() % 3 == 0 ? "corporate" : "consumer")});
    struct Product {
        const char* name;
        const char* category;
        double price;
    };
    static const std::array<Product, 15> kProducts = {{{"Garden Hose", "garden", 24.5},
                                                        {"Trowel", "garden", 9.75},
                                                        {"Seed Kit", "garden", 14.0},
                                                        {"Planter", "garden", 31.2},
                                                        {"Lawn Rake", "garden", 19.9},
                                                        {"Puzzle Cube", "toys", 12.3},
                                                        {"Kite", "toys", 17.6},
                                                        {"Robot Kit", "toys", 59.0},
                                                        {"Yo-yo", "toys", 4.25},
                                                        {"Atlas", "books", 42.0},
                                                        {"Cookbook", "books", 27.5},
                                                        {"Field Guide", "books", 21.8},
                                                        {"Novel", "books", 13.1},
                                                        {"Poetry", "books", 11.4},
                                                        {"Sketchbook", "books", 8.6}}};
    for (std::size_t p = 0; p < kProducts.size(); ++p)
        w.insert("products", {static_cast<std::int64_t>(p + 1), std::string(kProducts[p].name),
                              std::string(kProducts[p].category), kProducts[p].price});
    for (int o = 0; o < 60; ++o) {
        // The first customer gets every fifth order so per-customer questions have data.
        const auto customer = o % 5 == 0 ? 1 : static_cast<std::int64_t>(1 + rng() % kNames.size());
        const auto month = 1 + rng() % 6;
        const auto day = 1 + rng() % 28;
        std::string date = "2023-0" + std::to_string(month) + "-" + (day < 10 ? "0" : "") + std::to_string(day);
        w.insert("orders", {static_cast<std::int64_t>(o + 1), customer, date});
        const int items = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < items; ++i)
            w.insert("order_items", {static_cast<std::int64_t>(o + 1),
                                     static_cast<std::int64_t>(1 + rng() % kProducts.size()),
                                     static_cast<std::int64_t>(1 + rng() % 5)});
    }
    w.commit();
}

struct TaskSpec {
    const char* db;
    const char* question;
    const char* evidence;
    const char* difficulty;
    std::vector<std::string> candidates;  // candidates[0] doubles as gold unless `gold` is set
    const char* gold = nullptr;
};

std::vector<TaskSpec> toxicology_tasks() {
    const std::string sodium(kSodiumSql);
    return {
        {"toxicology", "Count the sodium atoms that belong to molecules labelled non-carcinogenic.",
         "sodium refers to element = 'na'; non-carcinogenic refers to label = '-'", "simple",
         {sodium,
          "SELECT COUNT(*) FROM atom JOIN molecule ON atom.molecule_id = molecule.molecule_id WHERE atom.element = 'na' AND molecule.label = '-'",
          "SELECT COUNT(DISTINCT T1.molecule_id) FROM atom AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id WHERE T1.element = 'na' AND T2.label = '-'",
          "SELECT COUNT(T1.atom_id) FROM atom AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id WHERE T1.element = 'na'",
          "SELEC COUNT(*) FROM atom"}},
        {"toxicology", "Which molecules carry the carcinogenic label?", "carcinogenic refers to label = '+'", "simple",
         {"SELECT molecule_id FROM molecule WHERE label = '+'", "SELECT molecule_id FROM molecule WHERE label = '+'",
          "SELECT molecule_id FROM molecule WHERE label = '-'",
          "SELECT molecule_id FROM molecule WHERE label = '+' ORDER BY molecule_id"}},
        {"toxicology", "Tell me the size of molecule TR004 in atoms.", "", "simple",
         {"SELECT COUNT(atom_id) FROM atom WHERE molecule_id = 'TR004'",
          "SELECT COUNT(*) FROM atom WHERE molecule_id = 'TR004'",
          "SELECT COUNT(*) FROM bond WHERE molecule_id = 'TR004'"}},
        {"toxicology", "Which chemical elements occur in molecule TR001?", "", "simple",
         {"SELECT DISTINCT element FROM atom WHERE molecule_id = 'TR001'",
          "SELECT element FROM atom WHERE molecule_id = 'TR001'",
          "SELECT DISTINCT element FROM atom WHERE molecule_id = 'TR001'",
          "SELECT DISTINCT element FROM atom WHERE molecule_id = 'TR001' ORDER BY element"}},
        {"toxicology", "What percentage of all bonds are double bonds?", "double bond refers to bond_type = '='",
         "moderate",
         {"SELECT CAST(SUM(CASE WHEN bond_type = '=' THEN 1 ELSE 0 END) AS REAL) * 100 / COUNT(bond_id) FROM bond",
          "SELECT COUNT(*) FROM bond WHERE bond_type = '='",
          "SELECT CAST(SUM(CASE WHEN bond_type = '=' THEN 1 ELSE 0 END) AS REAL) * 100 / COUNT(bond_id) FROM bond",
          "SELECT SUM(bond_type = '=') * 100.0 / COUNT(*) FROM bond"}},
        {"toxicology", "Break down the atoms of non-carcinogenic molecules by element.",
         "non-carcinogenic refers to label = '-'", "moderate",
         {"SELECT T1.element, COUNT(T1.atom_id) FROM atom AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id WHERE T2.label = '-' GROUP BY T1.element",
          "SELECT atom.element, COUNT(atom.atom_id) FROM atom INNER JOIN molecule ON atom.molecule_id = molecule.molecule_id WHERE molecule.label = '-' GROUP BY atom.element",
          "SELECT element, COUNT(*) FROM atom GROUP BY element"}},
        {"toxicology", "Name the molecules that contain at least one chlorine atom.", "chlorine refers to element = 'cl'",
         "moderate",
         {"SELECT DISTINCT T2.molecule_id FROM atom AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id WHERE T1.element = 'cl'",
          "SELECT DISTINCT molecule_id FROM atom WHERE element = 'cl'",
          "SELECT molecule_id FROM atom WHERE element = 'cl'",
          "SELECT DISTINCT molecule_id FROM atom WHERE element = 'Cl'"}},
        {"toxicology", "Find the molecule built from the largest number of atoms.", "", "moderate",
         {"SELECT molecule_id FROM atom GROUP BY molecule_id ORDER BY COUNT(atom_id) DESC LIMIT 1",
          "SELECT molecule_id FROM atom GROUP BY molecule_id ORDER BY COUNT(atom_id) DESC LIMIT 1",
          "SELECT molecule_id FROM atom GROUP BY molecule_id ORDER BY COUNT(atom_id) ASC LIMIT 1"}},
        {"toxicology", "Among carcinogenic molecules, how many triple bonds are there?",
         "triple bond refers to bond_type = '#'; carcinogenic refers to label = '+'", "challenging",
         {"SELECT COUNT(T1.bond_id) FROM bond AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id WHERE T1.bond_type = '#' AND T2.label = '+'",
          "SELECT COUNT(*) FROM bond WHERE bond_type = '#'",
          "SELECT COUNT(T1.bond_id) FROM bond AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id WHERE T1.bond_type = '#' AND T2.label = '+'",
          "SELECT COUNT(bond_id) FROM bond JOIN molecule USING (molecule_id) WHERE bond_type = '#' AND label = '+'",
          "SELECT COUNT(bond_id FROM bond"}},
        {"toxicology", "Bond TR002_1_2 links which two atoms?", "", "simple",
         {"SELECT atom_id, atom_id2 FROM connected WHERE bond_id = 'TR002_1_2'",
          "SELECT atom_id, atom_id2 FROM connected WHERE bond_id = 'TR002_1_2'",
          "SELECT atom_id FROM connected WHERE bond_id = 'TR002_1_2'"}},
    };
}

std::vector<TaskSpec> school_tasks() {
    return {
        {"school", "Tell me how many twelfth graders there are.", "twelfth graders refers to grade = 12", "simple",
         {"SELECT COUNT(*) FROM students WHERE grade = 12", "SELECT COUNT(student_id) FROM students WHERE grade = 12",
          "SELECT COUNT(*) FROM students WHERE grade > 11", "SELECT COUNT(*) FROM students"}},
        {"school", "Who is the faculty advisor of the robotics club?", "robotics club refers to name = 'Robotics'",
         "simple",
         {"SELECT advisor FROM clubs WHERE name = 'Robotics'", "SELECT advisor FROM clubs WHERE name = 'Robotics'",
          "SELECT name FROM clubs WHERE advisor = 'Robotics'"}},
        {"school", "Report the mean GPA of chess club members.", "chess club refers to clubs.name = 'Chess'", "moderate",
         {"SELECT AVG(T1.gpa) FROM students AS T1 INNER JOIN clubs AS T2 ON T1.club_id = T2.club_id WHERE T2.name = 'Chess'",
          "SELECT AVG(gpa) FROM students WHERE club_id = (SELECT club_id FROM clubs WHERE name = 'Chess')",
          "SELECT AVG(gpa) FROM students"}},
        {"school", "Which course is worth the most credits?", "", "simple",
         {"SELECT title FROM courses ORDER BY credits DESC LIMIT 1",
          "SELECT title FROM courses WHERE credits = (SELECT MAX(credits) FROM courses)",
          "SELECT title FROM courses ORDER BY credits LIMIT 1"}},
        {"school", "Give the names of pupils scoring above 90 in Algebra.", "Algebra refers to courses.title = 'Algebra'",
         "challenging",
         {"SELECT DISTINCT T1.name FROM students AS T1 INNER JOIN enrollments AS T2 ON T1.student_id = T2.student_id INNER JOIN courses AS T3 ON T2.course_id = T3.course_id WHERE T3.title = 'Algebra' AND T2.score > 90",
          "SELECT T1.name FROM students AS T1 INNER JOIN enrollments AS T2 ON T1.student_id = T2.student_id INNER JOIN courses AS T3 ON T2.course_id = T3.course_id WHERE T3.title = 'Algebra' AND T2.score > 90",
          "SELECT T1.name FROM students AS T1 INNER JOIN enrollments AS T2 ON T1.student_id = T2.student_id WHERE T2.score > 90"}},
        {"school", "Tell me the number of pupils outside every club.", "outside every club refers to club_id IS NULL",
         "simple",
         {"SELECT COUNT(*) FROM students WHERE club_id IS NULL", "SELECT COUNT(*) FROM students WHERE club_id = NULL",
          "SELECT COUNT(*) FROM students WHERE club_id IS NULL",
          "SELECT COUNT(student_id) FROM students WHERE club_id IS NULL"}},
        {"school", "Per club, what is the head count?", "", "moderate",
         {"SELECT T2.name, COUNT(T1.student_id) FROM students AS T1 INNER JOIN clubs AS T2 ON T1.club_id = T2.club_id GROUP BY T2.name",
          "SELECT club_id, COUNT(*) FROM students GROUP BY club_id",
          "SELECT T2.name, COUNT(T1.student_id) FROM students AS T1 INNER JOIN clubs AS T2 ON T1.club_id = T2.club_id GROUP BY T2.name"}},
        {"school", "Best Chemistry score on record?", "Chemistry refers to courses.title = 'Chemistry'", "moderate",
         {"SELECT MAX(T1.score) FROM enrollments AS T1 INNER JOIN courses AS T2 ON T1.course_id = T2.course_id WHERE T2.title = 'Chemistry'",
          "SELECT MAX(score) FROM enrollments",
          "SELECT MAX(T1.score) FROM enrollments AS T1 INNER JOIN courses AS T2 ON T1.course_id = T2.course_id WHERE T2.title = 'Chemistry'",
          "SELECT MAX(score) FROM enrollments WHERE course_id IN (SELECT course_id FROM courses WHERE title = 'Chemistry')"}},
        {"school", "Name the three pupils with the best GPA.", "", "simple",
         {"SELECT name FROM students ORDER BY gpa DESC LIMIT 3", "SELECT name FROM students ORDER BY gpa DESC LIMIT 3",
          "SELECT name FROM students ORDER BY gpa LIMIT 3", "SELECT name FROM student ORDER BY gpa DESC LIMIT 3"}},
        {"school", "In how many distinct courses is Ava Chen enrolled?", "", "challenging",
         {"SELECT COUNT(DISTINCT T2.course_id) FROM students AS T1 INNER JOIN enrollments AS T2 ON T1.student_id = T2.student_id WHERE T1.name = 'Ava Chen'",
          "SELECT COUNT(*) FROM enrollments WHERE student_id = (SELECT student_id FROM students WHERE name = 'Ava Chen')",
          "SELECT COUNT(*) FROM enrollments"}},
    };
}

std::vector<TaskSpec> retail_tasks() {
    return {
        {"retail", "How many shoppers live in Denver?", "", "simple",
         {"SELECT COUNT(*) FROM customers WHERE city = 'Denver'", "SELECT COUNT(*) FROM customers WHERE city = 'Denver'",
          "SELECT COUNT(*) FROM customers WHERE city = 'denver'"}},
        {"retail", "Show the products sold in the garden category.", "", "simple",
         {"SELECT name FROM products WHERE category = 'garden'", "SELECT name FROM products WHERE category = 'Garden'",
          "SELECT name FROM products WHERE category = 'garden'",
          "SELECT product_id FROM products WHERE category = 'garden'"}},
        {"retail", "Which toy costs the most?", "toy refers to category = 'toys'", "simple",
         {"SELECT name FROM products WHERE category = 'toys' ORDER BY price DESC LIMIT 1",
          "SELECT name FROM products ORDER BY price DESC LIMIT 1",
          "SELECT name FROM products WHERE category = 'toys' ORDER BY price DESC LIMIT 1"}},
        {"retail", "Total units of Garden Hose sold across all orders?", "", "moderate",
         {"SELECT SUM(T1.quantity) FROM order_items AS T1 INNER JOIN products AS T2 ON T1.product_id = T2.product_id WHERE T2.name = 'Garden Hose'",
          "SELECT COUNT(T1.quantity) FROM order_items AS T1 INNER JOIN products AS T2 ON T1.product_id = T2.product_id WHERE T2.name = 'Garden Hose'",
          "SELECT SUM(T1.quantity) FROM order_items AS T1 INNER JOIN products AS T2 ON T1.product_id = T2.product_id WHERE T2.name = 'Garden Hose'",
          "SELECT SUM(quantity) FROM order_items WHERE product_id = (SELECT product_id FROM products WHERE name = 'Garden Hose')"}},
        {"retail", "Number of orders placed during March 2023?", "March 2023 refers to order_date LIKE '2023-03-%'",
         "simple",
         {"SELECT COUNT(order_id) FROM orders WHERE order_date LIKE '2023-03-%'",
          "SELECT COUNT(*) FROM orders WHERE strftime('%m', order_date) = '03'",
          "SELECT COUNT(*) FROM orders WHERE order_date LIKE '2023-3-%'"}},
        {"retail", "List every corporate customer based in Boston.", "corporate refers to segment = 'corporate'",
         "simple",
         {"SELECT name FROM customers WHERE segment = 'corporate' AND city = 'Boston'",
          "SELECT name FROM customers WHERE segment = 'corporate' OR city = 'Boston'",
          "SELECT name FROM customers WHERE segment = 'corporate' AND city = 'Boston'"}},
        {"retail", "Customers from which city placed the most orders?", "", "challenging",
         {"SELECT T1.city FROM customers AS T1 INNER JOIN orders AS T2 ON T1.customer_id = T2.customer_id GROUP BY T1.city ORDER BY COUNT(T2.order_id) DESC LIMIT 1",
          "SELECT city FROM customers GROUP BY city ORDER BY COUNT(*) DESC LIMIT 1",
          "SELECT T1.city FROM customers AS T1 INNER JOIN orders AS T2 ON T1.customer_id = T2.customer_id GROUP BY T1.city ORDER BY COUNT(T2.order_id) DESC LIMIT 1"}},
        {"retail", "Mean price of the books on offer?", "books refers to category = 'books'", "simple",
         {"SELECT AVG(price) FROM products WHERE category = 'books'", "SELECT AVG(price) FROM products WHERE category = 'books'",
          "SELECT AVG(price) FROM products", "SELECT AVG(price) FROM product WHERE category = 'books'"}},
        {"retail", "What did Lena Park spend in total?", "spending is SUM(quantity * price)", "challenging",
         {"SELECT SUM(T3.quantity * T4.price) FROM customers AS T1 INNER JOIN orders AS T2 ON T1.customer_id = T2.customer_id INNER JOIN order_items AS T3 ON T2.order_id = T3.order_id INNER JOIN products AS T4 ON T3.product_id = T4.product_id WHERE T1.name = 'Lena Park'",
          "SELECT SUM(T3.quantity) FROM customers AS T1 INNER JOIN orders AS T2 ON T1.customer_id = T2.customer_id INNER JOIN order_items AS T3 ON T2.order_id = T3.order_id WHERE T1.name = 'Lena Park'",
          "SELECT SUM(T3.quantity * T4.price) FROM customers AS T1 INNER JOIN orders AS T2 ON T1.customer_id = T2.customer_id INNER JOIN order_items AS T3 ON T2.order_id = T3.order_id INNER JOIN products AS T4 ON T3.product_id = T4.product_id WHERE T1.name = 'Lena Park'"}},
        {"retail", "For each product category, how many distinct products were ever ordered?", "", "moderate",
         {"SELECT T2.category, COUNT(DISTINCT T1.product_id) FROM order_items AS T1 INNER JOIN products AS T2 ON T1.product_id = T2.product_id GROUP BY T2.category",
          "SELECT category, COUNT(*) FROM products GROUP BY category",
          "SELECT T2.category, COUNT(DISTINCT T1.product_id) FROM order_items AS T1 INNER JOIN products AS T2 ON T1.product_id = T2.product_id GROUP BY T2.category",
          "SELECT T2.category, COUNT(T1.product_id) FROM order_items AS T1 INNER JOIN products AS T2 ON T1.product_id = T2.product_id GROUP BY T2.category"}},
    };
}

}  // namespace

FixtureCorpus make_fixtures(const std::filesystem::path& out_dir) {
    FixtureCorpus c;
    c.root = out_dir;
    c.db_dir = out_dir / "db";
    c.log = out_dir / "log.jsonl";
    c.questions = out_dir / "questions.jsonl";
    c.db_ids = {"toxicology", "school", "retail"};
    std::error_code ec;
    std::filesystem::create_directories(c.db_dir, ec);
    if (ec || !std::filesystem::is_directory(c.db_dir)) throw IoError("cannot create " + c.db_dir.string());
    try {
        build_toxicology(c.db_dir / "toxicology.sqlite");
        build_school(c.db_dir / "school.sqlite");
        build_retail(c.db_dir / "retail.sqlite");
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError("cannot write fixture databases under " + c.db_dir.string() + ": " + e.what());
    }

    const auto tox = toxicology_tasks();
    const auto school = school_tasks();
    const auto retail = retail_tasks();
    std::vector<LogEntry> entries;
    std::vector<LogEntry> questions;
    auto add = [&](const TaskSpec& spec, std::size_t n) {
        LogEntry e;
        e.task.task_id = std::string(spec.db).substr(0, 3) + "-" + pad3(static_cast<int>(n));
        e.task.db_id = spec.db;
        e.task.question = spec.question;
        e.task.evidence = spec.evidence;
        e.task.gold_sql = spec.gold ? std::string(spec.gold) : spec.candidates.front();
        e.task.difficulty = spec.difficulty;
        e.task.sequence_index = entries.size();
        e.candidates.task_id = e.task.task_id;
        for (const auto& sql : spec.candidates) e.candidates.candidates.push_back({sql, "fixture-sampler"});
        LogEntry q = e;
        q.candidates.candidates.clear();
        questions.push_back(std::move(q));
        entries.push_back(std::move(e));
    };
    for (std::size_t i = 0; i < tox.size(); ++i) {
        add(tox[i], i + 1);
        add(school[i], i + 1);
        add(retail[i], i + 1);
    }
    write_log(c.log, entries);
    write_log(c.questions, questions);
    return c;
}

}  // namespace orange
