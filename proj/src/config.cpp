#include "paneitz/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace paneitz {

namespace {

// Two-column numeric CSV; lines starting with a letter or '#' are skipped.
nlohmann::json read_table(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read profile table '" + path + "'");
    nlohmann::json rows = nlohmann::json::array();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0])))
            continue;
        for (char& ch : line)
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        std::istringstream ls(line);
        double t, h;
        if (!(ls >> t >> h)) throw ConfigError("bad row in profile table: '" + line + "'");
        rows.push_back({t, h});
    }
    return rows;
}

}  // namespace

void RunConfig::validate() const
{
    if (!(q > 1.0)) throw ConfigError("q must exceed 1");
    if (gridsize < 16) throw ConfigError("gridsize must be >= 16");
    if (!(rtol > 0.0) || !(atol > 0.0) || !(eps_rel > 0.0))
        throw ConfigError("tolerances and eps must be positive");
    if (s_max < 0.0) throw ConfigError("s_max must be nonnegative (0 selects the default)");
    if (i_max < 1) throw ConfigError("i_max must be >= 1");
    if (profile_points < 200) throw ConfigError("profile_points must be >= 200");
    if (out.empty()) throw ConfigError("output directory must not be empty");
    const std::string src = coefficients.value("source", "");
    if (src != "fixed" && src != "builtin" && src != "product" && src != "polynomial")
        throw ConfigError("coefficient source must be fixed, builtin, product or polynomial");
}

nlohmann::json RunConfig::to_json() const
{
    return {{"profile", profile},
            {"coefficients", coefficients},
            {"q", q},
            {"numerics",
             {{"gridsize", gridsize},
              {"rtol", rtol},
              {"atol", atol},
              {"eps_rel", eps_rel},
              {"s_max", s_max},
              {"i_max", i_max},
              {"profile_points", profile_points}}},
            {"out", out},
            {"seed", seed}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j)
{
    RunConfig c;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto known = [](const nlohmann::json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
        for (const auto& item : obj.items()) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; }))
                throw ConfigError("unknown key '" + where + item.key() + "'");
        }
    };
    known(j, {"profile", "coefficients", "q", "numerics", "out", "seed"}, "");
    if (j.contains("numerics") && j.at("numerics").is_object())
        known(j.at("numerics"),
              {"gridsize", "rtol", "atol", "eps_rel", "s_max", "i_max", "profile_points"},
              "numerics.");
    try {
        if (j.contains("profile")) c.profile = j.at("profile");
        if (j.contains("coefficients")) c.coefficients = j.at("coefficients");
        c.q = j.value("q", c.q);
        if (j.contains("numerics")) {
            const auto& n = j.at("numerics");
            c.gridsize = n.value("gridsize", c.gridsize);
            c.rtol = n.value("rtol", c.rtol);
            c.atol = n.value("atol", c.atol);
            c.eps_rel = n.value("eps_rel", c.eps_rel);
            c.s_max = n.value("s_max", c.s_max);
            c.i_max = n.value("i_max", c.i_max);
            c.profile_points = n.value("profile_points", c.profile_points);
        }
        c.out = j.value("out", c.out);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

Profile RunConfig::make_profile() const
{
    nlohmann::json j = profile;
    if (j.value("kind", "sphere") == "tabulated" && j.contains("table") && !j.contains("samples"))
        j["samples"] = read_table(j.at("table").get<std::string>());
    try {
        return profile_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad profile: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad profile: ") + e.what());
    }
}

bool RunConfig::has_path() const { return coefficients.value("source", "") != "fixed"; }

CoefficientPath RunConfig::make_path() const
{
    const auto& j = coefficients;
    const std::string src = j.value("source", "");
    try {
        if (src == "builtin") return CoefficientPath::builtin(j.value("c", 0.2), q);
        if (src == "product")
            return CoefficientPath::product(j.value("n", 3), j.value("m", 3), j.value("lambda0", 2.0),
                                            j.value("slope", 2.0), q, j.value("s_min", 1.0));
        if (src == "polynomial")
            return CoefficientPath::polynomial(j.at("alpha").get<std::vector<double>>(),
                                               j.at("beta").get<std::vector<double>>(), q,
                                               j.value("s_min", 0.0));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad coefficient path: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad coefficient path: ") + e.what());
    }
    throw ConfigError("coefficient source '" + src + "' does not define a path");
}

PaneitzCoefficients RunConfig::make_coefficients(std::optional<double> s) const
{
    try {
        if (!has_path())
            return paneitz::make_coefficients(coefficients.at("alpha").get<double>(),
                                              coefficients.at("beta").get<double>(), q);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("fixed coefficients need alpha and beta: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!s) throw ConfigError("a coefficient path needs --s to pick a point");
    try {
        return make_path().at(*s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace paneitz
