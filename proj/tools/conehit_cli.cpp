#include <CLI11.hpp>

#include "conehit/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"asymptotics of quadrant hitting by correlated Brownian "
                 "motion with drift"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")
            ->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "random seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--workers", workers, "worker thread count");
    };
    add_common(app.add_subcommand("analyze", "index sets, g structure and constants"));
    add_common(app.add_subcommand("estimate", "add the Monte Carlo constant"));
    add_common(app.add_subcommand("validate", "add path-simulation checks"));
    add_common(app.add_subcommand("oracle", "check against closed-form families"));

    CLI11_PARSE(app, argc, argv);

    conehit::RunOptions opts;
    opts.config_path = config_path;
    opts.out_dir = out_dir;
    if (seed_set) opts.seed = seed;
    opts.workers = workers;

    const std::string mode_name = app.get_subcommands().front()->get_name();
    return conehit::run(conehit::parse_mode(mode_name), opts);
}
