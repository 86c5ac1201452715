#include "plc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace plc {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, std::size_t line, const std::string& what) {
    throw Error(Errc::ConfigError, name + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::vector<long long>> parse_matrix(const std::string& name, std::size_t line,
                                                 const std::string& text) {
    std::vector<std::vector<long long>> rows;
    std::string chunk;
    std::istringstream all(text);
    while (std::getline(all, chunk, ';')) {
        std::istringstream rs(chunk);
        std::vector<long long> row;
        long long x;
        while (rs >> x) row.push_back(x);
        std::string rest;
        if (rs.clear(), rs >> rest, !rest.empty())
            fail(name, line, "bad matrix entry '" + rest + "'");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(name, line, "empty matrix");
    std::size_t w = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != w) fail(name, line, "ragged matrix rows");
    return rows;
}

} // namespace

RunConfig parse_config(std::istream& in, const std::string& name) {
    RunConfig cfg;
    std::optional<std::size_t> f_decl, mu_decl, n_decl, k_decl;
    std::string line;
    std::size_t ln = 0;
    bool saw_g = false, saw_v = false;
    while (std::getline(in, line)) {
        ++ln;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(name, ln, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.empty()) fail(name, ln, "empty value for '" + key + "'");

        auto as_u64 = [&](const std::string& s) -> std::uint64_t {
            try {
                std::size_t pos = 0;
                std::uint64_t x = std::stoull(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return x;
            } catch (...) {
                fail(name, ln, "bad integer '" + s + "' for '" + key + "'");
            }
        };
        auto as_bool = [&](const std::string& s) -> bool {
            if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
            if (s == "off" || s == "false" || s == "0" || s == "no") return false;
            fail(name, ln, "bad boolean '" + s + "' for '" + key + "'");
        };

        if (key == "q") {
            cfg.q = static_cast<std::uint32_t>(as_u64(val));
        } else if (key == "n") {
            n_decl = static_cast<std::size_t>(as_u64(val));
        } else if (key == "k") {
            k_decl = static_cast<std::size_t>(as_u64(val));
        } else if (key == "f") {
            f_decl = static_cast<std::size_t>(as_u64(val));
        } else if (key == "mu") {
            mu_decl = static_cast<std::size_t>(as_u64(val));
        } else if (key == "G") {
            cfg.g_rows = parse_matrix(name, ln, val);
            saw_g = true;
        } else if (key == "V") {
            cfg.v_rows = parse_matrix(name, ln, val);
            saw_v = true;
        } else if (key == "lambda") {
            auto rows = parse_matrix(name, ln, val);
            std::vector<std::vector<std::uint8_t>> lam;
            for (const auto& r : rows) {
                std::vector<std::uint8_t> lr;
                for (long long x : r) {
                    if (x != 0 && x != 1) fail(name, ln, "lambda entries must be 0/1");
                    lr.push_back(static_cast<std::uint8_t>(x));
                }
                lam.push_back(std::move(lr));
            }
            cfg.lambda_rows = std::move(lam);
        } else if (key == "v") {
            cfg.v = static_cast<std::size_t>(as_u64(val));
            if (cfg.v == 0) fail(name, ln, "v is 1-based");
        } else if (key == "seed") {
            cfg.seed = as_u64(val);
        } else if (key == "trials") {
            cfg.trials = static_cast<std::size_t>(as_u64(val));
            cfg.trials_set = true;
        } else if (key == "privacy") {
            if (val == "off")
                cfg.privacy = PrivacyMode::Off;
            else if (val == "structural")
                cfg.privacy = PrivacyMode::Structural;
            else if (val == "exhaustive")
                cfg.privacy = PrivacyMode::Exhaustive;
            else
                fail(name, ln, "privacy must be off|structural|exhaustive");
        } else if (key == "emit_queries") {
            cfg.emit_queries = as_bool(val);
        } else if (key == "fixed_randomness") {
            cfg.fixed_randomness = as_bool(val);
        } else if (key == "privacy_budget") {
            cfg.privacy_budget = as_u64(val);
        } else if (key == "message_file") {
            cfg.message_file = val;
        } else {
            fail(name, ln, "unknown key '" + key + "'");
        }
    }
    if (!saw_g) throw Error(Errc::ConfigError, name + ": missing G");
    if (!saw_v) throw Error(Errc::ConfigError, name + ": missing V");
    if (n_decl && *n_decl != cfg.g_rows[0].size())
        throw Error(Errc::ConfigError, name + ": n does not match G's column count");
    if (k_decl && *k_decl != cfg.g_rows.size())
        throw Error(Errc::ConfigError, name + ": k does not match G's row count");
    if (mu_decl && *mu_decl != cfg.v_rows.size())
        throw Error(Errc::ConfigError, name + ": mu does not match V's row count");
    if (f_decl && *f_decl != cfg.v_rows[0].size())
        throw Error(Errc::ConfigError, name + ": f does not match V's column count");
    if (cfg.v > cfg.v_rows.size())
        throw Error(Errc::ConfigError, name + ": v exceeds mu");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ConfigError, "cannot open config '" + path + "'");
    return parse_config(in, path);
}

Instance RunConfig::instance() const {
    return Instance::make(q, g_rows, v_rows, v - 1,
                          lambda_rows.value_or(std::vector<std::vector<std::uint8_t>>{}), seed,
                          fixed_randomness);
}

} // namespace plc
