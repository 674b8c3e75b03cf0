#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "quad_eit/commands.hpp"
#include "quad_eit/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Probe response of a quadratically coupled membrane-in-the-middle cavity"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_path;
    std::optional<double> from;
    std::optional<double> to;
    std::optional<int> points;
    std::optional<std::string> dump_trajectory;

    for (const char* name : {"steady", "sweep", "dip", "verify", "baseline"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--from", from, "sweep start, units of omega_m");
        sub->add_option("--to", to, "sweep end, units of omega_m");
        sub->add_option("--points", points, "sweep point count");
        sub->add_option("--dump-trajectory", dump_trajectory,
                        "verify: write the strong-probe trajectory CSV here");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(qeit::ErrorCategory::Config);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    qeit::RunConfig run;
    try {
        run = qeit::load_config(config_path);
    } catch (const qeit::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return e.exit_code();
    }
    if (out_path) run.output = *out_path;
    if (from || to || points) {
        qeit::SweepWindow window = run.sweep.value_or(qeit::SweepWindow{});
        if (from) window.from = *from;
        if (to) window.to = *to;
        if (points) window.points = *points;
        if (!(window.from < window.to) || window.points < 2) {
            std::cerr << "config error: sweep requires from < to and at least 2 points\n";
            return static_cast<int>(qeit::ErrorCategory::Config);
        }
        run.sweep = window;
    }

    return qeit::run_command(command, run, qeit::CommandOptions{dump_trajectory}, std::cout,
                             std::cerr);
}
