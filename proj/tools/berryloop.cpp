// berryloop — environment-induced Berry phase simulator CLI

#include <iostream>
#include <string>
#include <vector>

#include "berryloop/shell/commands.hpp"

namespace {

void usage() {
    std::cout <<
        "usage: berryloop <subcommand> [config.toml] [flags]\n"
        "\n"
        "subcommands:\n"
        "  constants   coupling constants and validity flags (JSON)\n"
        "  kernel      bath kernel A(τ) dump, gaussian and exact (CSV)\n"
        "  evolve      integrate the rotating-frame coherence (JSON, optional --trace csv)\n"
        "  oracle      Monte-Carlo noise-ensemble ground truth (JSON)\n"
        "  sweep       run a t_p family, one JSONL record per run\n"
        "  decompose   fit scaling coefficients from a sweep (--in sweep.jsonl)\n"
        "  compare     cross-check redfield / closed_form / oracle with tolerances\n"
        "\n"
        "flags: --set section.key=value   override a config entry (repeatable)\n"
        "       --out PATH|-              output file (default $BERRYLOOP_OUTDIR or .)\n"
        "       --in PATH                 input JSONL (decompose)\n"
        "       --trace PATH              per-step trace CSV (evolve)\n"
        "       --tau-max X --tau-count N kernel dump range\n"
        "       --force                   downgrade validity warnings to exit 0\n"
        "       --no-timestamp            omit the timestamp field\n"
        "\n"
        "exit codes: 0 ok, 1 error, 2 validity warnings\n";
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        usage();
        return args.empty() ? 1 : 0;
    }
    return berryloop::shell::run_command(args);
}
