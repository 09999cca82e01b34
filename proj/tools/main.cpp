// Command-line front end; talks to the library through the C API only.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "buildflex.h"

namespace {

int exit_code_for(bflex_status status) {
    switch (status) {
        case BFLEX_OK: return 0;
        case BFLEX_ERR_NUMERIC:
        case BFLEX_ERR_INTERNAL: return 3;
        default: return 2;  // bad input: arguments, files, schema, validation
    }
}

int finish(const char* command, bflex_status status) {
    if (status != BFLEX_OK) {
        std::fprintf(stderr, "%s failed (%s): %s\n", command, bflex_status_name(status),
                     bflex_last_error());
    }
    return exit_code_for(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"buildflex: robust polyhedral building-flexibility models and aggregator scheduling"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd, bool with_seed) {
        cmd->add_option("--config", config_path, "run configuration JSON")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides the config's path)");
        if (with_seed) cmd->add_option("--seed", seed, "seed override (0 keeps the config's seed)");
    };

    CLI::App* generate = app.add_subcommand("generate-data", "simulate buildings and write train/cv/test CSVs");
    add_common(generate, true);
    CLI::App* train = app.add_subcommand("train", "fit cluster, band, limit, and tree models per building");
    add_common(train, true);
    CLI::App* validate = app.add_subcommand("validate", "score trained bundles on the test data");
    add_common(validate, false);
    CLI::App* schedule = app.add_subcommand("schedule", "solve the aggregator program and write reports");
    add_common(schedule, true);
    CLI::App* report = app.add_subcommand("report", "print a text summary of trained artifacts");
    add_common(report, false);

    CLI11_PARSE(app, argc, argv);

    const char* out = out_dir.empty() ? nullptr : out_dir.c_str();
    if (generate->parsed())
        return finish("generate-data", bflex_generate_data(config_path.c_str(), out, seed));
    if (train->parsed()) return finish("train", bflex_train(config_path.c_str(), out, seed));
    if (validate->parsed()) return finish("validate", bflex_validate(config_path.c_str(), out));
    if (schedule->parsed()) return finish("schedule", bflex_schedule(config_path.c_str(), out, seed));
    if (report->parsed()) {
        char* text = nullptr;
        bflex_status status = bflex_report(config_path.c_str(), &text);
        if (status == BFLEX_OK && text) {
            std::fputs(text, stdout);
            bflex_string_free(text);
        }
        return finish("report", status);
    }
    return 2;
}
