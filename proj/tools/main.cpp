#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

void add_solver_flags(CLI::App* sc, orpca_params& prm) {
    sc->add_option("--alpha-e", prm.alpha_e, "sparse factor init scale");
    sc->add_option("--alpha-r", prm.alpha_r, "coefficient factor init scale");
    sc->add_option("--g0", prm.g0, "basis gain init");
    sc->add_option("--mu", prm.mu, "momentum coefficient");
    sc->add_option("--eta-e", prm.eta_e, "sparse step size (0 = auto)");
    sc->add_option("--eta-r", prm.eta_r, "ridge step size (0 = auto)");
    sc->add_option("--eta-l", prm.eta_l, "basis step size (0 = auto)");
    sc->add_option("--t-e", prm.t_e, "sparse iteration budget (0 = auto)");
    sc->add_option("--t-r", prm.t_r, "ridge iteration budget (0 = auto)");
    sc->add_option("--t-l", prm.t_l, "basis iteration cap");
    sc->add_option("--t0", prm.t0, "alternation round cap");
    sc->add_option("--budget-cap", prm.budget_cap, "auto budget ceiling");
    sc->add_option("--conv-tol", prm.conv_tol, "alternation exit tolerance");
    sc->add_option("--loss-exit-low", prm.loss_exit_low,
                   "basis update lower loss exit");
    sc->add_option("--loss-exit-high", prm.loss_exit_high,
                   "basis update upper loss exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orpca: streaming robust PCA decomposition"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(orpca_version()));

    orpca_cli::simulate_args sim;
    orpca_default_params(&sim.params);
    auto* sc_sim = app.add_subcommand(
        "simulate", "run on generated low-rank plus sparse data");
    sc_sim->add_option("--preset", sim.preset, "named size preset");
    sc_sim->add_option("-p,--dim", sim.p, "ambient dimension");
    sc_sim->add_option("-n,--samples", sim.n, "number of samples");
    sc_sim->add_option("--r-true", sim.r_true, "true subspace rank");
    sc_sim->add_option("--rho", sim.rho, "corruption density");
    sc_sim->add_option("--magnitude", sim.magnitude, "corruption scale");
    sc_sim->add_option("--rank", sim.rank, "model rank (0 = r-true)");
    sc_sim->add_option("--algo", sim.algo, "implicit, explicit or both");
    sc_sim->add_option("--lambda-mode", sim.lambda_mode,
                       "default, tuned or custom");
    sc_sim->add_option("--lambda1", sim.lambda1, "custom basis penalty");
    sc_sim->add_option("--lambda2", sim.lambda2, "custom sparse penalty");
    sc_sim->add_option("--seeds", sim.seeds, "number of trials");
    sc_sim->add_option("--seed0", sim.seed0, "first seed");
    sc_sim->add_option("-o,--out", sim.out_dir, "output directory")
        ->required();
    add_solver_flags(sc_sim, sim.params);

    orpca_cli::run_args run;
    orpca_default_params(&run.params);
    auto* sc_run =
        app.add_subcommand("run", "decompose a matrix from disk");
    sc_run->add_option("-i,--input", run.input, "input matrix (.orpm or .csv)")
        ->required();
    sc_run->add_option("--rank", run.rank, "model rank");
    sc_run->add_option("--algo", run.algo, "implicit or explicit");
    sc_run->add_option("--lambda1", run.lambda1,
                       "explicit basis penalty (0 = 1/sqrt(p))");
    sc_run->add_option("--lambda2", run.lambda2,
                       "explicit sparse penalty (0 = 1/sqrt(p))");
    sc_run->add_option("-o,--out", run.out_dir, "output directory")
        ->required();
    add_solver_flags(sc_run, run.params);

    orpca_cli::frames_args frames;
    orpca_default_params(&frames.params);
    auto* sc_frames = app.add_subcommand(
        "frames", "background/foreground split of a PGM sequence");
    sc_frames->add_option("inputs", frames.inputs, "frame files");
    sc_frames->add_option("--list", frames.list_file,
                          "file with one frame path per line");
    sc_frames->add_option("--width", frames.width, "working width");
    sc_frames->add_option("--height", frames.height, "working height");
    sc_frames->add_option("--rank", frames.rank, "background rank");
    sc_frames->add_option("-o,--out", frames.out_dir, "output directory")
        ->required();
    add_solver_flags(sc_frames, frames.params);

    orpca_cli::convert_args conv;
    auto* sc_conv = app.add_subcommand(
        "convert", "convert a matrix between .orpm and .csv");
    sc_conv->add_option("-i,--input", conv.input, "input matrix")->required();
    sc_conv->add_option("-o,--output", conv.output, "output matrix")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return orpca_cli::exit_config;
    }

    if (sc_sim->parsed()) return orpca_cli::cmd_simulate(sim);
    if (sc_run->parsed()) return orpca_cli::cmd_run(run);
    if (sc_frames->parsed()) return orpca_cli::cmd_frames(frames);
    if (sc_conv->parsed()) return orpca_cli::cmd_convert(conv);
    return orpca_cli::exit_config;
}
