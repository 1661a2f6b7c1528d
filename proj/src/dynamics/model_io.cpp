// model_io.cpp - JSON model definitions

#include "nonmark/model_io.hpp"

#include <algorithm>
#include <fstream>

#include "nonmark/builtin_models.hpp"
#include "nonmark/errors.hpp"

namespace nonmark::dynamics {

using nlohmann::json;

namespace {

cplx entry_from_json(const json& e)
{
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    throw ConfigError("matrix entry must be a number or a [re, im] pair, got " + e.dump());
}

ScalarFunction function_from_json(const json& j, const std::string& what)
{
    if (j.is_number()) return ScalarFunction::constant(j.get<double>());
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a number or a [[t, value], ...] table");
    std::vector<double> t, v;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
            throw ConfigError(what + ": table rows must be [t, value]");
        }
        t.push_back(row[0].get<double>());
        v.push_back(row[1].get<double>());
    }
    try {
        return tabulated(std::move(t), std::move(v));
    } catch (const InvalidParams& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

TimeLocalModel custom_from_json(const json& j)
{
    if (!j.contains("dim") || !j["dim"].is_number_integer()) throw ConfigError("custom model needs an integer \"dim\"");
    const auto dim = j["dim"].get<long>();
    if (dim < 2) throw ConfigError("custom model dimension must be at least 2");

    std::vector<HamiltonianTerm> h;
    for (const auto& term : j.value("hamiltonian", json::array())) {
        if (!term.contains("op")) throw ConfigError("Hamiltonian term without \"op\"");
        h.push_back({matrix_from_json(term["op"]),
                     function_from_json(term.value("coefficient", json(1.0)), "Hamiltonian coefficient")});
    }
    std::vector<Channel> ch;
    for (const auto& c : j.value("channels", json::array())) {
        if (!c.contains("jump") || !c.contains("rate")) throw ConfigError("channel needs \"jump\" and \"rate\"");
        const auto label = c.value("label", "channel " + std::to_string(ch.size()));
        ch.push_back({label, matrix_from_json(c["jump"]), function_from_json(c["rate"], "rate of " + label)});
    }
    SingularTimes st;
    for (const auto& t : j.value("singular_times", json::array())) {
        if (!t.is_number()) throw ConfigError("singular_times must be numbers");
        st.listed.push_back(t.get<double>());
    }
    std::sort(st.listed.begin(), st.listed.end());

    ModelDescriptor desc{"custom", {{"dim", static_cast<double>(dim)}}, std::monostate{}};
    return TimeLocalModel(static_cast<std::size_t>(dim), std::move(h), std::move(ch), std::move(st),
                          j.value("time_unit", std::string("1")), std::move(desc));
}

} // namespace

ScalarFunction tabulated(std::vector<double> times, std::vector<double> values)
{
    if (times.empty() || times.size() != values.size()) throw InvalidParams("table needs matching, non-empty columns");
    if (std::adjacent_find(times.begin(), times.end(), [](double a, double b) { return !(b > a); }) != times.end()) {
        throw InvalidParams("table times must be strictly increasing");
    }
    auto f = [t = std::move(times), v = std::move(values)](double x) {
        if (x <= t.front()) return v.front();
        if (x >= t.back()) return v.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
        const double w = (x - t[k - 1]) / (t[k] - t[k - 1]);
        return (1.0 - w) * v[k - 1] + w * v[k];
    };
    return {std::move(f), {}};
}

ComplexMatrix matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("matrix must be a list of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("matrix rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = entry_from_json(j[r][c]);
    }
    return m;
}

TimeLocalModel model_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("model") || !j["model"].is_string()) {
        throw ConfigError("model definition needs a \"model\" name");
    }
    const auto name = j["model"].get<std::string>();
    if (name == "custom") return custom_from_json(j);

    std::map<std::string, double> params;
    const auto given = j.value("params", json::object());
    for (const auto& [k, v] : given.items()) {
        if (!v.is_number()) throw ConfigError("parameter '" + k + "' must be a number");
        params[k] = v.get<double>();
    }
    return builtin_model(name, params);
}

TimeLocalModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file " + path.string());
    try {
        return model_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json descriptor_to_json(const ModelDescriptor& d)
{
    json params = json::object();
    for (const auto& [k, v] : d.params) params[k] = v;
    return {{"model", d.family}, {"params", params}};
}

} // namespace nonmark::dynamics
