#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "iplab/catalog.hpp"
#include "iplab/errors.hpp"
#include "iplab/experiments.hpp"
#include "json.hpp"

#ifndef IPLAB_VERSION
#define IPLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailedProperty = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw iplab::ConfigurationError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

/// Everything in the manifest is a function of the config: two identical runs give identical bytes.
std::string manifest(const iplab::ExperimentConfig& cfg, const std::string& config_text,
                     const iplab::ExperimentResult& result) {
    json artifacts = json::array();
    for (const auto& a : result.artifacts)
        artifacts.push_back({{"path", a.path}, {"bytes", a.bytes.size()}, {"sha256", sha256_hex(a.bytes)}});
    json props = json::array();
    for (const auto& r : result.reports)
        props.push_back({{"property_id", r.property_id}, {"pass", r.pass}, {"vacuous", r.vacuous}});
    json m = {{"schema", "iplab.manifest/1"},
              {"seed", cfg.seed},
              {"config", cfg.to_json()},
              {"config_file_sha256", sha256_hex(config_text)},
              {"config_sha256", sha256_hex(cfg.to_json().dump())},
              {"artifacts", artifacts},
              {"properties", props},
              {"all_pass", result.all_pass()},
              {"versions",
               {{"iplab", IPLAB_VERSION},
                {"compiler", __VERSION__},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"openssl", OPENSSL_VERSION_TEXT}}}};
    const auto& e = cfg.experiment;
    if (e != "radial-oracle" && e != "growth-bounds" && e != "full-suite" && e != "surrogate-unbounded")
        m["grid_sha256"] = sha256_hex(cfg.grid.build()->to_json().dump());
    return m.dump(2) + "\n";
}

std::string run_info(double seconds, int jobs) {
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return json{{"schema", "iplab.run_info/1"}, {"finished_utc", stamp}, {"wall_seconds", seconds}, {"jobs", jobs}}
               .dump(2) +
           "\n";
}

int run(const std::string& config_path, const std::string& out_flag, const std::optional<std::uint64_t>& seed,
        int jobs) {
    std::string text;
    iplab::ExperimentConfig cfg;
    try {
        text = read_file(config_path);
        json j = json::parse(text);
        if (seed && j.is_object()) j["seed"] = *seed;
        cfg = iplab::ExperimentConfig::from_json(j);
    } catch (const json::parse_error& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const iplab::ConfigurationError& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << config_path << ": config " << e.what() << "\n";
        return kExitUsage;
    }
    fs::path out = out_flag.empty() ? fs::path(cfg.output) : fs::path(out_flag);

    auto start = std::chrono::steady_clock::now();
    iplab::ExperimentResult result;
    try {
        result = iplab::run_experiment(cfg, jobs);
    } catch (const iplab::ConfigurationError& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: experiment '" << cfg.experiment << "' failed: " << e.what() << "\n";
        return kExitRuntime;
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    try {
        for (const auto& a : result.artifacts) write_file(out / a.path, a.bytes);
        write_file(out / "manifest.json", manifest(cfg, text, result));
        write_file(out / "run_info.json", run_info(seconds, jobs));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    for (const auto& r : result.reports)
        std::cout << (r.vacuous ? "VACUOUS" : r.pass ? "PASS   " : "FAIL   ") << "  " << r.property_id
                  << "  worst=" << iplab::format_double(r.worst_violation)
                  << "  tol=" << iplab::format_double(r.tolerance) << "  n=" << r.instances_run << "\n";
    std::cout << "artifacts written to " << out.string() << "\n";
    return result.all_pass() ? 0 : kExitFailedProperty;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experiment runner for the parabolic infinity-Laplacian laboratory"};
    app.require_subcommand(1);
    std::string out;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    app.add_option("--out", out, "Output directory (overrides the config's 'output')");
    app.add_option("--seed", seed, "Seed (overrides the config's 'seed')");
    app.add_option("--jobs", jobs, "Worker threads for independent instances")->check(CLI::PositiveNumber);

    std::string config;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
    run_cmd->add_option("config", config, "Experiment config file")->required();
    auto* catalog_cmd = app.add_subcommand("catalog", "List the built-in boundary data generators");
    run_cmd->fallthrough();
    catalog_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    if (catalog_cmd->parsed()) {
        std::cout << iplab::catalog_listing();
        return 0;
    }
    return run(config, out, seed, jobs);
}
