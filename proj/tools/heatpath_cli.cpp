// Command-line front end over the heatpath C interface.

#include "heatpath/heatpath.h"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Common {
    std::string config;
    std::optional<std::string> seed, out, workers, format;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "config file (key = value lines)");
    cmd->add_option("--seed", c.seed, "master seed (unsigned 64-bit)");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--workers", c.workers, "worker threads");
    cmd->add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
}

int exit_code(hp_status s) {
    switch (s) {
        case HP_OK: return 0;
        case HP_ERR_INVALID_INPUT:
        case HP_ERR_DOMAIN:
        case HP_ERR_UNSUPPORTED:
        case HP_ERR_UNDEFINED:
        case HP_ERR_VALIDATION: return 2;
        case HP_ERR_PROPERTY_FAILED: return 3;
        default: return 1;
    }
}

int report(hp_status s) {
    if (s != HP_OK) std::fprintf(stderr, "heatpath: %s: %s\n", hp_status_name(s), hp_last_error());
    return exit_code(s);
}

int run(const Common& c, hp_status (*action)(const hp_config*)) {
    hp_config* raw = nullptr;
    hp_status s = c.config.empty() ? hp_config_create(&raw) : hp_config_load(c.config.c_str(), &raw);
    if (s != HP_OK) return report(s);
    std::unique_ptr<hp_config, void (*)(hp_config*)> cfg(raw, hp_config_destroy);
    const std::pair<const char*, const std::optional<std::string>*> overrides[] = {
        {"seed", &c.seed}, {"out", &c.out}, {"workers", &c.workers}, {"format", &c.format}};
    for (const auto& [key, value] : overrides) {
        if (!*value) continue;
        s = hp_config_set(cfg.get(), key, (*value)->c_str());
        if (s != HP_OK) return report(s);
    }
    return report(action(cfg.get()));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflecting path integral estimates of heat semigroups"};
    app.set_version_flag("--version", std::string(hp_version()));
    app.require_subcommand(1);

    Common common;
    std::function<int()> chosen;
    auto leaf = [&](CLI::App* parent, const char* name, const char* help, hp_status (*action)(const hp_config*)) {
        CLI::App* cmd = parent->add_subcommand(name, help);
        add_common(cmd, common);
        cmd->callback([&chosen, &common, action] { chosen = [&common, action] { return run(common, action); }; });
    };

    CLI::App* billiard = app.add_subcommand("billiard", "billiard trajectories")->require_subcommand(1);
    leaf(billiard, "trace", "trace one reflected trajectory to trace.csv", hp_run_trace);
    CLI::App* heat = app.add_subcommand("heat", "heat semigroup estimates")->require_subcommand(1);
    leaf(heat, "step", "single time slice on the grid", hp_run_step);
    leaf(heat, "slices", "one estimate file per partition size", hp_run_slices);
    leaf(heat, "converge", "convergence sweep against the oracle", hp_run_converge);
    CLI::App* oracle = app.add_subcommand("oracle", "reference solutions")->require_subcommand(1);
    leaf(oracle, "eval", "evaluate the oracle on the grid", hp_run_oracle);
    CLI::App* props = app.add_subcommand("props", "property suite")->require_subcommand(1);
    leaf(props, "run", "run every invariant check", hp_run_props);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return chosen ? chosen() : 2;
}
