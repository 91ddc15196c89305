// Criteria 6 and 7 on the public red + white wine-quality table.
// Reads the combined CSV named by IMPARTIAL_WINE_CSV; exits 77 (skipped) when unset.

#include "impartial/diagnostics.hpp"
#include "wine_checks.hpp"

#include <cstdlib>
#include <iostream>

using namespace impartial;

int main() {
  const char* path = std::getenv("IMPARTIAL_WINE_CSV");
  if (path == nullptr || *path == '\0') {
    std::cout << "SKIP  IMPARTIAL_WINE_CSV not set; criteria 6 and 7 on the public wine table not run\n";
    return 77;
  }
  set_warning_handler([](std::string_view) {});

  int failures = 0;
  const auto report = [&](const char* id, const char* name, const acceptance::Line& l) {
    if (!l.pass) ++failures;
    std::cout << (l.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << l.detail << std::endl;
  };
  try {
    const Schema schema = load_schema(IMPARTIAL_WINE_SCHEMA);
    const Dataset data = load_csv(path, schema);
    std::cout << "wine table: " << data.rows() << " rows from " << path << '\n';
    const acceptance::WineRun run = acceptance::run_wine_protocol(data, schema);
    report("6a", "Linear results vs reference values", acceptance::wine_table_values(run));
    report("6b", "Wine protocol properties", acceptance::wine_properties(run));
    for (const auto& row : acceptance::wine_table_rows(run)) std::cout << "      " << row << '\n';
    report("7", "Bias mechanics", acceptance::bias_mechanics(data, schema, "white"));
  } catch (const std::exception& e) {
    std::cout << "FAIL  wine acceptance aborted: " << e.what() << '\n';
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
