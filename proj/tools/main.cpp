#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "heterograph/cli.hpp"

namespace {

struct FlagSet {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    bool force = false;
    bool dry_run = false;
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config")->required();
    cmd->add_option("--out", flags.out, "Override the config's output directory");
    cmd->add_option("--seed", flags.seed, "Override the config's base_seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--jobs", flags.jobs, "Parallel runs (results are deterministic anyway)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--force", flags.force, "Reuse a non-empty output directory");
    cmd->add_flag("--dry-run", flags.dry_run, "Print the plan without writing anything");
}

heterograph::cli::Options to_options(const FlagSet& flags) {
    heterograph::cli::Options opts;
    opts.config_path = flags.config_path;
    if (!flags.out.empty()) opts.out_override = flags.out;
    if (flags.seed_set) opts.seed_override = flags.seed;
    opts.jobs = flags.jobs;
    opts.force = flags.force;
    opts.dry_run = flags.dry_run;
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heterograph: heterophily-aware GNN toolkit"};
    app.require_subcommand(1);

    FlagSet flags;
    int (*handler)(const nlohmann::json&, const heterograph::cli::Options&) = nullptr;

    auto* generate = app.add_subcommand("generate", "Generate synthetic graph bundles");
    auto* train = app.add_subcommand("train", "Train variants over bundles");
    auto* ablate = app.add_subcommand("ablate", "Run the fixed design-axis ablation sets");
    auto* analyze = app.add_subcommand("analyze", "Numerical theorem reports");
    auto* report = app.add_subcommand("report", "Merge and summarize result files");
    for (auto* cmd : {generate, train, ablate, analyze, report}) add_common_flags(cmd, flags);

    generate->callback([&]() { handler = heterograph::cli::cmd_generate; });
    train->callback([&]() { handler = heterograph::cli::cmd_train; });
    ablate->callback([&]() { handler = heterograph::cli::cmd_ablate; });
    analyze->callback([&]() { handler = heterograph::cli::cmd_analyze; });
    report->callback([&]() { handler = heterograph::cli::cmd_report; });

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = heterograph::cli::load_config(flags.config_path);
        const int failed = handler(config, to_options(flags));
        return failed == 0 ? 0 : 1;
    } catch (const heterograph::cli::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
