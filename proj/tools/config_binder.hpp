#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowgest/error.hpp"

namespace flowgest::cli {

// Layered configuration for one subcommand: built-in defaults, overridden
// by a `key = value` config file, overridden by command-line flags. The
// resolved state serializes back to the same format (`run_config` echo),
// and reloading that file reproduces the run.
class ConfigBinder {
public:
    explicit ConfigBinder(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", config_path_,
                        "config file with `key = value` lines; flags win over file values");
    }

    template <typename T>
    CLI::Option* bind(const std::string& flag, const std::string& key, T& value,
                      const std::string& help) {
        CLI::Option* opt = cmd_->add_option(flag, value, help);
        entries_.push_back(Entry{
            key, opt,
            [&value] {
                std::ostringstream os;
                os.precision(17);
                os << value;
                return os.str();
            },
            [&value, key](const std::string& s) {
                std::istringstream is(s);
                is >> value;
                if (is.fail()) fail("config: bad value '" + s + "' for key '" + key + "'");
            }});
        return opt;
    }

    CLI::Option* bind_flag(const std::string& flag, const std::string& key, bool& value,
                           const std::string& help) {
        CLI::Option* opt = cmd_->add_flag(flag, value, help);
        entries_.push_back(Entry{key, opt, [&value] { return value ? "true" : "false"; },
                                 [&value, key](const std::string& s) {
                                     if (s == "true" || s == "1")
                                         value = true;
                                     else if (s == "false" || s == "0")
                                         value = false;
                                     else
                                         fail("config: bad bool '" + s + "' for key '" + key + "'");
                                 }});
        return opt;
    }

    CLI::Option* bind_string(const std::string& flag, const std::string& key, std::string& value,
                             const std::string& help) {
        CLI::Option* opt = cmd_->add_option(flag, value, help);
        entries_.push_back(Entry{key, opt, [&value] { return value; },
                                 [&value](const std::string& s) { value = s; }});
        return opt;
    }

    CLI::Option* bind_int_list(const std::string& flag, const std::string& key,
                               std::vector<int>& value, const std::string& help) {
        CLI::Option* opt = cmd_->add_option(
            flag,
            [&value](const std::vector<std::string>& args) {
                value = parse_int_list(args.back());
                return true;
            },
            help + " (comma-separated)");
        entries_.push_back(Entry{key, opt,
                                 [&value] {
                                     std::string s;
                                     for (size_t i = 0; i < value.size(); ++i)
                                         s += (i ? "," : "") + std::to_string(value[i]);
                                     return s;
                                 },
                                 [&value](const std::string& s) { value = parse_int_list(s); }});
        return opt;
    }

    // file values apply only where the command line did not set the option
    void apply_file() {
        if (config_path_.empty()) return;
        std::ifstream in(config_path_);
        if (!in) fail("cannot open config file '" + config_path_ + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            const size_t eq = trimmed.find('=');
            if (eq == std::string::npos)
                fail("config line " + std::to_string(lineno) + ": expected `key = value`");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key == "command") {
                if (value != cmd_->get_name())
                    fail("config file is for command '" + value + "', not '" + cmd_->get_name() +
                         "'");
                continue;
            }
            Entry* e = find(key);
            if (!e) {
                std::string known = "command";
                for (const auto& en : entries_) known += ", " + en.key;
                fail("config: unknown key '" + key + "' (valid keys: " + known + ")");
            }
            if (e->opt->count() == 0) e->set(value);
        }
    }

    std::string echo() const {
        std::string out = "command = " + cmd_->get_name() + "\n";
        for (const auto& e : entries_) out += e.key + " = " + e.get() + "\n";
        return out;
    }

    void write_echo(const std::string& dir) const {
        const std::string path = dir + "/run_config";
        std::ofstream out(path);
        if (!out) fail("cannot write '" + path + "'");
        out << echo();
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* opt;
        std::function<std::string()> get;
        std::function<void(const std::string&)> set;
    };

    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }

    static std::vector<int> parse_int_list(const std::string& s) {
        std::vector<int> out;
        std::istringstream is(s);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            if (tok.empty()) continue;
            try {
                out.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                fail("bad integer list element '" + tok + "'");
            }
        }
        return out;
    }

    Entry* find(const std::string& key) {
        for (auto& e : entries_)
            if (e.key == key) return &e;
        return nullptr;
    }

    CLI::App* cmd_;
    std::string config_path_;
    std::vector<Entry> entries_;
};

}  // namespace flowgest::cli
