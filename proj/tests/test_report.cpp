#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "enn/io.hpp"
#include "enn/sieve.hpp"

using namespace enn;
using nlohmann::json;

namespace {

// Just enough of JSON Schema to check the published report schema: type,
// enum, required, properties, additionalProperties, items, minItems, minimum.
bool matches_type(const std::string& t, const json& v) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
}

void validate(const json& schema, const json& value, const std::string& path,
              std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = matches_type(t.get<std::string>(), value);
        } else {
            for (const auto& alt : t) ok = ok || matches_type(alt.get<std::string>(), value);
        }
        if (!ok) {
            errors.push_back(path + ": type mismatch, got " + value.dump());
            return;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& alt : schema["enum"]) ok = ok || (alt == value);
        if (!ok) errors.push_back(path + ": " + value.dump() + " not in enum");
    }
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema["minimum"].get<double>()) {
        errors.push_back(path + ": below minimum");
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema["required"]) {
                if (!value.contains(key.get<std::string>()))
                    errors.push_back(path + ": missing required key " + key.dump());
            }
        }
        const json props = schema.value("properties", json::object());
        for (const auto& [key, child] : value.items()) {
            if (props.contains(key)) {
                validate(props[key], child, path + "." + key, errors);
            } else if (schema.contains("additionalProperties")) {
                const json& extra = schema["additionalProperties"];
                if (extra.is_boolean()) {
                    if (!extra.get<bool>())
                        errors.push_back(path + ": unexpected key " + key);
                } else {
                    validate(extra, child, path + "." + key, errors);
                }
            }
        }
    }
    if (value.is_array()) {
        if (schema.contains("minItems") &&
            value.size() < schema["minItems"].get<std::size_t>()) {
            errors.push_back(path + ": too few items");
        }
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < value.size(); ++i)
                validate(schema["items"], value[i], path + "[" + std::to_string(i) + "]",
                         errors);
        }
    }
}

std::vector<std::string> validate_report(const json& report) {
    const json schema = read_json_file(std::string(ENN_DOCS_DIR) + "/report.schema.json");
    std::vector<std::string> errors;
    validate(schema, report, "report", errors);
    return errors;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("schema validator catches malformed documents") {
    json report = report_to_json(run_experiment({{"experiment", "ulln"},
                                                 {"n_grid", {50, 200}},
                                                 {"networks", 5},
                                                 {"probes", 0},
                                                 {"replications", 2},
                                                 {"oracle_points", 2000},
                                                 {"slope_min", -5.0},
                                                 {"slope_max", 5.0}},
                                                3, 1));
    REQUIRE(validate_report(report).empty());

    json broken = report;
    broken.erase("seed");
    CHECK(!validate_report(broken).empty());

    broken = report;
    broken["experiment"] = "karaoke";
    CHECK(!validate_report(broken).empty());

    broken = report;
    broken["cells"][0]["pass"] = "yes";
    CHECK(!validate_report(broken).empty());

    broken = report;
    broken["cells"][0]["extra"] = 1.0;
    CHECK(!validate_report(broken).empty());

    broken = report;
    broken["cells"] = json::array();
    CHECK(!validate_report(broken).empty());
}

TEST_CASE("experiment reports conform to the published schema") {
    const json consistency{{"experiment", "consistency"},
                           {"target", {{"kind", "linear"}, {"a", 0.0}, {"b", 1.0}}},
                           {"noise", {{"kind", "gaussian"}, {"sigma2", 0.04}}},
                           {"taus", {0.5, 0.9}},
                           {"n_grid", {25, 75}},
                           {"replications", 2},
                           {"train", {{"max_iters", 20}, {"restarts", 1}}},
                           {"norm_ceiling", 10.0}};
    CHECK(validate_report(report_to_json(run_experiment(consistency, 4, 2))).empty());

    const json approximation{{"experiment", "approximation"},
                             {"target", {{"kind", "constant"}, {"c", 0.4}}},
                             {"r_grid", {1, 2}},
                             {"n", 30},
                             {"replications", 2},
                             {"train", {{"max_iters", 20}, {"restarts", 1}}},
                             {"oracle_points", 1000}};
    CHECK(validate_report(report_to_json(run_experiment(approximation, 4, 1))).empty());

    const json normality{{"experiment", "normality"},
                         {"n", 40},
                         {"replications", 200},
                         {"sieve", {{"r", 1}, {"v", 4.0}, {"m", 5.0}, {"d", 1}}},
                         {"train", {{"max_iters", 10}, {"restarts", 1}}}};
    CHECK(validate_report(report_to_json(run_experiment(normality, 4, 2))).empty());
}

TEST_CASE("model json round trips bit exactly") {
    const SieveSpec sieve(3, 5.0, 8.0, 2);
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const EnnParams params = sample_sieve(sieve, seed);
        const double risk = 0.123456789123456789;
        const json j = model_to_json(params, Tau(0.25), sieve, risk);

        const StoredModel back = model_from_json(j);
        CHECK(back.params.output_bias == params.output_bias);
        CHECK(back.params.output_weights == params.output_weights);
        CHECK(back.params.hidden_weights == params.hidden_weights);
        CHECK(back.params.hidden_biases == params.hidden_biases);
        CHECK(back.tau.value() == 0.25);
        CHECK(back.risk == risk);
        CHECK(back.sieve.width == sieve.width);
        CHECK(back.sieve.output_budget == sieve.output_budget);
        CHECK(back.sieve.hidden_budget == sieve.hidden_budget);
        CHECK(back.sieve.input_dim == sieve.input_dim);
    }
}

TEST_CASE("model files round trip through disk") {
    const auto path = std::filesystem::temp_directory_path() / "enn_test_model.json";
    const SieveSpec sieve(2, 4.0, 6.0, 1);
    const EnnParams params = sample_sieve(sieve, 99);
    save_model(path.string(), params, Tau(0.5), sieve, 0.25);

    const StoredModel back = load_model(path.string());
    CHECK(back.params.output_weights == params.output_weights);
    CHECK(back.params.hidden_weights == params.hidden_weights);
    CHECK(back.risk == 0.25);

    const std::string text = slurp(path);
    CHECK(text == model_to_json(params, Tau(0.5), sieve, 0.25).dump(2) + "\n");
    std::filesystem::remove(path);
}

TEST_CASE("model json rejects inconsistent payloads") {
    const SieveSpec sieve(2, 4.0, 6.0, 1);
    const json good = model_to_json(sample_sieve(sieve, 7), Tau(0.5), sieve, 0.0);
    CHECK_NOTHROW(model_from_json(good));

    json bad = good;
    bad["sieve"]["r"] = 3;
    CHECK_THROWS_AS(model_from_json(bad), ConfigError);

    bad = good;
    bad["params"]["alpha"] = {0.1};
    CHECK_THROWS_AS(model_from_json(bad), ConfigError);

    bad = good;
    bad["params"]["gamma"][0] = {0.1, 0.2};
    CHECK_THROWS_AS(model_from_json(bad), ConfigError);

    bad = good;
    bad["tau"] = 1.5;
    CHECK_THROWS_AS(model_from_json(bad), std::invalid_argument);

    bad = good;
    bad.erase("params");
    CHECK_THROWS_AS(model_from_json(bad), ConfigError);
}

TEST_CASE("csv io round trips and reports line numbers") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "enn_test_data.csv";

    const Dataset data = generate_dataset(TargetSpec::sine(1.0, 1.0),
                                          NoiseSpec::gaussian(0.5), 40, 3, 2024);
    write_dataset_csv(path.string(), data);
    const Dataset back = read_dataset_csv(path.string());
    CHECK(back.x == data.x);
    CHECK(back.y == data.y);

    {
        std::ofstream out(path);
        out << "x1,y\n0.5,abc\n";
    }
    CHECK_THROWS_WITH(read_dataset_csv(path.string()),
                      Catch::Matchers::ContainsSubstring("line 2"));

    {
        std::ofstream out(path);
        out << "x1,x2,y\n0.1,0.2,0.3\n0.1,0.2\n";
    }
    CHECK_THROWS_WITH(read_dataset_csv(path.string()),
                      Catch::Matchers::ContainsSubstring("line 3"));

    {
        std::ofstream out(path);
        out << "a,b,c\n1,2,3\n";
    }
    CHECK_THROWS_WITH(read_dataset_csv(path.string()),
                      Catch::Matchers::ContainsSubstring("header"));

    {
        std::ofstream out(path);
        out << "x1,y\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(path.string()), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("report files are byte stable across a write and reread") {
    const ExperimentReport report = run_experiment({{"experiment", "approximation"},
                                                    {"target", {{"kind", "constant"}, {"c", 0.2}}},
                                                    {"r_grid", {1, 2}},
                                                    {"n", 25},
                                                    {"replications", 2},
                                                    {"train", {{"max_iters", 15}, {"restarts", 1}}},
                                                    {"oracle_points", 1000}},
                                                   17, 1);
    const auto path = std::filesystem::temp_directory_path() / "enn_test_report.json";
    write_report(path.string(), report);
    CHECK(slurp(path) == report_to_json(report).dump(2) + "\n");

    const json parsed = read_json_file(path.string());
    CHECK(parsed == report_to_json(report));
    CHECK(parsed.dump(2) == report_to_json(report).dump(2));
    std::filesystem::remove(path);
}
