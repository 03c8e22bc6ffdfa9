#include "pflow/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pflow {

using nlohmann::json;

namespace {

json spec_to_json(const LatticeSpec& s)
{
    return json{{"L", s.L}, {"Ltp", s.Ltp}, {"Lsp", s.Lsp}, {"j", s.j},
                {"n", s.n}};
}

LatticeSpec spec_from_json(const json& j)
{
    LatticeSpec s;
    s.L = j.at("L").get<std::int64_t>();
    s.Ltp = j.at("Ltp").get<std::int64_t>();
    s.Lsp = j.at("Lsp").get<std::int64_t>();
    s.j = j.at("j").get<int>();
    s.n = j.at("n").get<int>();
    return s;
}

} // namespace

std::string fmt_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string field_to_json(const Field& f)
{
    json j;
    j["lattice"] = spec_to_json(f.lat.spec());
    json vals = json::array();
    for (const auto& z : f.v)
        vals.push_back(json::array({z.real(), z.imag()}));
    j["values"] = std::move(vals);
    return j.dump();
}

Field field_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("field parse error: ") + e.what());
    }
    const Lattice l(spec_from_json(j.at("lattice")));
    const auto& vals = j.at("values");
    if (static_cast<std::int64_t>(vals.size()) != l.num_points())
        throw ConfigError("field file: value count does not match the lattice");
    Field f(l);
    for (std::int64_t i = 0; i < f.size(); ++i)
        f.v[i] = cplx{vals[i][0].get<double>(), vals[i][1].get<double>()};
    return f;
}

std::string kernel_to_json(const QuarticKernel& V)
{
    json j;
    j["lattice"] = spec_to_json(V.lattice().spec());
    json entries = json::array();
    for (const auto& [key, v] : V.entries()) {
        json offs = json::array();
        offs.push_back(json::array({0, 0, 0, 0}));
        for (int i = 0; i < 3; ++i)
            offs.push_back(json::array(
                {key[4 * i], key[4 * i + 1], key[4 * i + 2], key[4 * i + 3]}));
        entries.push_back(json{{"offsets", std::move(offs)}, {"value", v}});
    }
    j["entries"] = std::move(entries);
    return j.dump();
}

QuarticKernel kernel_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("kernel parse error: ") + e.what());
    }
    QuarticKernel V{Lattice(spec_from_json(j.at("lattice")))};
    for (const auto& e : j.at("entries")) {
        const auto& offs = e.at("offsets");
        if (offs.size() != 4)
            throw ConfigError("kernel file: each entry needs four offsets");
        QuarticKernel::Offsets o;
        // first offset is the pinned argument; must be zero
        for (int ax = 0; ax < 4; ++ax)
            if (offs[0][ax].get<std::int64_t>() != 0)
                throw ConfigError("kernel file: first offset must be zero");
        for (int i = 0; i < 3; ++i)
            for (int ax = 0; ax < 4; ++ax)
                o[i][ax] = offs[i + 1][ax].get<std::int64_t>();
        V.add_symmetrized(o, e.at("value").get<double>());
    }
    return V;
}

std::map<std::string, std::string> parse_flat_config(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open for writing: " + path);
    out << text;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace pflow
