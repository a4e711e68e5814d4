#include "doctest.h"
#include "json.hpp"
#include "tunnelkit/models.hpp"
#include "tunnelkit/table_io.hpp"

using namespace tunnelkit;

namespace {

// Walks the stored arrays directly, independent of the library's loader.
double walk(const nlohmann::json& doc, const std::array<double, 4>& row) {
    const auto& p = doc["payload"];
    double out = p["base_score"].get<double>();
    for (const auto& t : p["trees"]) {
        int n = 0;
        while (t["feature"][n].get<int>() >= 0) {
            const int f = t["feature"][n].get<int>();
            n = row[static_cast<std::size_t>(f)] <= t["threshold"][n].get<double>() ? t["left"][n].get<int>()
                                                                                     : t["right"][n].get<int>();
        }
        out += p["shrinkage"].get<double>() * t["value"][n].get<double>();
    }
    return out;
}

}  // namespace

TEST_CASE("version 1.0 model fixture loads and predicts") {
    const std::string text = read_file(std::string(TUNNELKIT_FIXTURE_DIR) + "/model_v1_0.json");
    const auto doc = nlohmann::json::parse(text);
    REQUIRE(doc["version"] == "1.0");
    const auto model = deserialize(text);
    CHECK_NOTHROW(check_schema(model));
    CHECK(model.family == Family::XGB);
    CHECK(model.ensemble.trees.size() == 3);
    const std::vector<std::array<double, 4>> rows{
        {0.2, 100.0, -5.0, 0.1}, {1.4, 900.0, 1.0, 0.4}, {0.7, 180.0, -11.0, 0.0}, {0.67, 183.0, 0.0, 0.25}};
    for (const auto& r : rows) CHECK(predict_row(model, r) == walk(doc, r));
}
