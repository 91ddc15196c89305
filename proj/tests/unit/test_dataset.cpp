#include <doctest.h>

#include "impartial/csv.hpp"
#include "impartial/dataset.hpp"
#include "impartial/errors.hpp"
#include "oracles.hpp"

#include <sstream>

using namespace impartial;

namespace {

Schema schema_from(const std::string& text) {
  std::istringstream in(text);
  return parse_schema(in, "test.schema");
}

Dataset data_from(const std::string& text, const Schema& schema) {
  std::istringstream in(text);
  return read_csv(in, schema, "test.csv");
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* kLoanSchema =
    "# loan data\n"
    "default = response\n"
    "edu     = legitimate, categorical\n"
    "group   = sensitive, categorical\n";

}  // namespace

TEST_CASE("csv reader handles quoting, CRLF and BOM") {
  std::istringstream in("\xEF\xBB\xBF" "a,b\r\n\"x, y\",\"he said \"\"hi\"\"\"\r\n1,\"multi\nline\"\n");
  const auto t = csv::read(in);
  REQUIRE(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x, y");
  CHECK(t.rows[0][1] == "he said \"hi\"");
  CHECK(t.rows[1][1] == "multi\nline");
  CHECK(t.line_numbers[0] == 2);
  CHECK(t.line_numbers[1] == 3);
}

TEST_CASE("csv reader reports ragged rows with their line") {
  std::istringstream in("a,b\n1,2\n3\n");
  const auto msg = error_of([&] { csv::read(in, "r.csv"); });
  CHECK(msg.find("r.csv") != std::string::npos);
  CHECK(msg.find("3") != std::string::npos);
}

TEST_CASE("csv escaping and number formatting round-trip") {
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("q\"") == "\"q\"\"\"");
  double v = 0.0;
  CHECK(csv::parse_double(csv::format_full(0.1 + 0.2), v));
  CHECK(v == 0.1 + 0.2);
  CHECK(csv::parse_double(csv::format_shortest(1.0 / 3.0), v));
  CHECK(v == 1.0 / 3.0);
  CHECK(csv::format_shortest(0.5) == "0.5");
  CHECK_FALSE(csv::parse_double("1.5abc", v));
  CHECK_FALSE(csv::parse_double("", v));
  CHECK(csv::parse_double(" +2 ", v));
  CHECK(v == 2.0);
}

TEST_CASE("schema parsing") {
  const auto s = schema_from(std::string(kLoanSchema) + "interact = edu * group\nnote = ignore\n");
  REQUIRE(s.columns.size() == 4);
  CHECK(s.response().name == "default");
  CHECK(s.find("edu")->kind == ColumnKind::Categorical);
  CHECK(s.find("group")->role == CovariateRole::Sensitive);
  CHECK(s.find("note")->role == CovariateRole::Ignore);
  REQUIRE(s.interactions.size() == 1);
  CHECK(s.interactions[0].left == "edu");

  std::ostringstream out;
  write_schema(out, s);
  const auto again = schema_from(out.str());
  CHECK(again.columns.size() == 4);
  CHECK(again.find("edu")->kind == ColumnKind::Categorical);
  CHECK(again.interactions.size() == 1);
}

TEST_CASE("schema errors carry the line number") {
  CHECK(error_of([] { schema_from("y = response\nx = legit\n"); }).find("test.schema:2") != std::string::npos);
  CHECK(error_of([] { schema_from("y = response\nx legitimate\n"); }).find(":2") != std::string::npos);
  CHECK(error_of([] { schema_from("y = response\nx = suspect, ordinal\n"); }).find("ordinal") != std::string::npos);
  CHECK_THROWS_AS(schema_from("x = legitimate\n"), SchemaError);
  CHECK_THROWS_AS(schema_from("y = response\nz = response\n"), SchemaError);
  CHECK_THROWS_AS(schema_from("y = response\ny = legitimate\n"), SchemaError);
  CHECK_THROWS_AS(schema_from("y = response, categorical\n"), SchemaError);
  CHECK_THROWS_AS(schema_from("y = response\nx = legitimate\ninteract = x * q\n"), SchemaError);
  CHECK_THROWS_AS(schema_from("y = response\nx = legitimate\ninteract = x * y\n"), SchemaError);
}

TEST_CASE("interaction roles") {
  using R = CovariateRole;
  CHECK(interaction_role(R::Sensitive, R::Legitimate) == R::Legitimate);
  CHECK(interaction_role(R::Legitimate, R::Sensitive) == R::Legitimate);
  CHECK(interaction_role(R::Suspect, R::Legitimate) == R::Suspect);
  CHECK(interaction_role(R::Sensitive, R::Suspect) == R::Suspect);
  CHECK(interaction_role(R::BlackBoxEstimate, R::Legitimate) == R::Suspect);
  CHECK(interaction_role(R::Sensitive, R::Sensitive) == R::Sensitive);
  CHECK_THROWS_AS(interaction_role(R::Response, R::Legitimate), SchemaError);
  CHECK_THROWS_AS(interaction_role(R::Ignore, R::Legitimate), SchemaError);
}

TEST_CASE("csv ingestion types columns from the schema") {
  const auto schema = schema_from(std::string(kLoanSchema) + "extra = ignore\n");
  const auto d = data_from("default,edu,group,extra,unused\n1,low,s-,?,z\n0,high,s+,?,z\n0,low,s+,?,z\n", schema);
  CHECK(d.rows() == 3);
  CHECK(d.has_column("edu"));
  CHECK_FALSE(d.has_column("extra"));
  CHECK_FALSE(d.has_column("unused"));
  CHECK(d.column("edu").levels == std::vector<std::string>{"low", "high"});
  CHECK(d.column("default").values == std::vector<double>{1, 0, 0});
}

TEST_CASE("csv ingestion errors name the location") {
  const auto schema = schema_from(kLoanSchema);
  auto msg = error_of([&] { data_from("default,edu\n1,low\n", schema); });
  CHECK(msg.find("group") != std::string::npos);
  msg = error_of([&] { data_from("default,edu,group\n1,low,s-\nabc,low,s-\n", schema); });
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("default") != std::string::npos);
  msg = error_of([&] { data_from("default,edu,group\n1,,s-\n", schema); });
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("edu") != std::string::npos);
  CHECK_THROWS_AS(data_from("default,edu,group\ninf,low,s-\n", schema), IngestionError);
  CHECK_THROWS_AS(data_from("default,edu,group\n", schema), IngestionError);
}

TEST_CASE("encoder one-hot expands with the first level as reference") {
  const auto schema = schema_from(kLoanSchema);
  const auto d = data_from("default,edu,group\n1,low,s-\n0,high,s+\n0,low,s+\n1,high,s-\n", schema);
  const auto e = encode(d, schema);
  REQUIRE(e.S.cols() == 1);
  REQUIRE(e.X.cols() == 1);
  CHECK(e.W.cols() == 0);
  CHECK(e.s_names[0] == "group=s+");
  CHECK(e.x_names[0] == "edu=high");
  CHECK(e.x_means[0] == doctest::Approx(0.5));
  CHECK(e.X(1, 0) == doctest::Approx(0.5));
  CHECK(e.X(0, 0) == doctest::Approx(-0.5));
  CHECK(e.s_group_labels == std::vector<std::string>{"s-", "s+", "s+", "s-"});
  CHECK(e.group_levels() == std::vector<std::string>{"s-", "s+"});
}

TEST_CASE("interaction columns follow the role rules") {
  const auto schema = schema_from(
      "y = response\nx = legitimate\nw = suspect\ns = sensitive\n"
      "interact = s * x\ninteract = x * w\n");
  Dataset d;
  d.add_numeric("y", {1, 2, 3, 4});
  d.add_numeric("x", {1, 2, 3, 5});
  d.add_numeric("w", {2, 1, 0, 1});
  d.add_numeric("s", {0, 1, 0, 1});
  const auto e = encode(d, schema);
  REQUIRE(e.X.cols() == 2);
  REQUIRE(e.W.cols() == 2);
  CHECK(e.x_names[1] == "s*x");
  CHECK(e.w_names[1] == "x*w");
  // Products use the raw encodings and are centered afterwards.
  CHECK(e.x_means[1] == doctest::Approx((0 * 1 + 1 * 2 + 0 * 3 + 1 * 5) / 4.0));
  CHECK(e.X(1, 1) == doctest::Approx(2 - 7.0 / 4.0));
}

TEST_CASE("encoder applies training levels and means to new data") {
  const auto schema = schema_from(kLoanSchema);
  const auto train = data_from("default,edu,group\n1,low,s-\n0,high,s+\n0,low,s+\n1,low,s-\n", schema);
  const auto enc = Encoder::fit(train, schema);
  const auto test = data_from("default,edu,group\n1,high,s-\n", schema);
  const auto e = enc.transform(test);
  CHECK(e.X(0, 0) == doctest::Approx(1.0 - 0.25));
  CHECK(e.S(0, 0) == doctest::Approx(0.0 - 0.5));
  const auto bad = data_from("default,edu,group\n1,phd,s-\n", schema);
  CHECK_THROWS_AS(enc.transform(bad), IngestionError);
}

TEST_CASE("select_rows keeps level lists and write_csv round-trips") {
  const auto schema = schema_from(kLoanSchema);
  const auto d = data_from("default,edu,group\n0.25,low,s-\n1e-3,high,s+\n", schema);
  const std::size_t rows[] = {1};
  const auto sub = d.select_rows(rows);
  CHECK(sub.rows() == 1);
  CHECK(sub.column("edu").levels.size() == 2);
  std::ostringstream out;
  write_csv(out, d);
  const auto back = data_from(out.str(), schema);
  CHECK(back.column("default").values == d.column("default").values);
  CHECK(back.column("group").labels == d.column("group").labels);
}

TEST_CASE("with_covariate_role rewrites only legitimate and suspect columns") {
  const auto s = schema_from("y = response\nx = legitimate\nw = suspect\ns = sensitive\nb = blackbox\n");
  const auto all = with_covariate_role(s, CovariateRole::Suspect);
  CHECK(all.find("x")->role == CovariateRole::Suspect);
  CHECK(all.find("s")->role == CovariateRole::Sensitive);
  CHECK(all.find("b")->role == CovariateRole::BlackBoxEstimate);
}
