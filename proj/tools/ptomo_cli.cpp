#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>

using namespace ptomo;
using namespace ptomo::cli;

namespace {

void add_grid(CLI::App* s, RunConfig& c)
{
    s->add_option("--n", c.n, "grid size per axis (phantom default 64, otherwise the data's sample count)");
    s->add_option("--half-width", c.half_width, "cube half width H");
    s->add_option("--r0", c.r0, "support radius of the field");
    s->add_option("--r1", c.r1, "outer radius of the cutoff");
}

void add_views(CLI::App* s, RunConfig& c)
{
    s->add_option("--angles", c.angles, "angles per view K (even, >= 8)");
    s->add_option("--samples", c.samples, "detectors and slices per view M (0: grid size)");
}

void add_solver(CLI::App* s, RunConfig& c)
{
    s->add_option("--step", c.step, "transport step (0: half a voxel)");
    s->add_option("--forward", c.forward, "rk4 or neumann");
    s->add_option("--terms", c.terms, "Born series terms for --forward neumann");
}

// Config values fill options not given on the command line.
void apply_config(CLI::App* app, CLI::App* sub, RunConfig& cfg, const std::string& path, const std::set<std::string>& known)
{
    const auto entries = load_config(path);
    const bool bumps_on_cli = !cfg.bumps.empty();
    for (const auto& e : entries) {
        const std::string where = path + ":" + std::to_string(e.line);
        if (e.key == "config")
            throw InvalidParameter(where + ": nested config files are not supported");
        if (e.key == "bump") {
            if (sub->get_option_no_throw("--bump") == nullptr || bumps_on_cli)
                continue;
            cfg.bumps.push_back(e.value);
            cfg.bump_lines.push_back(e.line);
            continue;
        }
        CLI::Option* opt = sub->get_option_no_throw("--" + e.key);
        if (opt == nullptr)
            opt = app->get_option_no_throw("--" + e.key);
        if (opt == nullptr) {
            if (known.count(e.key) != 0)
                continue; // belongs to another subcommand
            throw InvalidParameter(where + ": unknown key '" + e.key + "'");
        }
        if (opt->count() > 0)
            continue;
        try {
            if (opt->get_type_size() == 0) { // flag
                if (e.value == "true" || e.value == "1")
                    opt->add_result(std::string("true"));
                else if (e.value == "false" || e.value == "0")
                    continue;
                else
                    throw InvalidParameter("flag expects true or false");
            } else {
                opt->add_result(e.value);
            }
            opt->run_callback();
        } catch (const std::exception& ex) {
            throw InvalidParameter(where + ": bad value '" + e.value + "' for " + e.key + ": " + ex.what());
        }
    }
}

} // namespace

int main(int argc, char** argv)
{
    RunConfig cfg;
    std::string config_path;
    CLI::App app{"ptomo: polarization tomography of small anisotropic perturbations"};
    app.require_subcommand(1);
    app.add_option("--config", config_path, "flat key = value file; flags override it");
    app.add_option("--threads", cfg.threads, "worker threads (0: PTOMO_THREADS or hardware)");

    auto* phantom = app.add_subcommand("phantom", "rasterize a bump phantom");
    add_grid(phantom, cfg);
    phantom->add_option("--out", cfg.out, "output field (PTVOL1)");
    phantom->add_option("--scale", cfg.scale, "multiply the whole field by this factor");
    phantom->add_option("--bump", cfg.bumps, "cx,cy,cz,radius,a11,a22,a33,a12,a13,a23 (repeatable)");
    phantom->add_option("--amplitudes", cfg.amplitudes, "imaginary (default) or real bump amplitudes");

    auto* forward = app.add_subcommand("forward", "S11 data of a field on the six standard views");
    forward->add_option("--in", cfg.in, "input field (PTVOL1)");
    forward->add_option("--out", cfg.out, "output sinogram (PTSIN1)");
    add_views(forward, cfg);
    add_solver(forward, cfg);

    auto* transverse = app.add_subcommand("transverse", "transverse ray transform Jf");
    transverse->add_option("--in", cfg.in, "input field (PTVOL1)");
    transverse->add_option("--out", cfg.out, "output data (PTLAM1)");
    add_views(transverse, cfg);
    transverse->add_option("--step", cfg.step, "quadrature step (0: half a voxel)");

    auto* invert = app.add_subcommand("invert-j", "six-view inversion of J");
    invert->add_option("--in", cfg.in, "PTLAM1 data, or PTSIN1 (S11 data is reduced to S11 - 1)");
    invert->add_option("--out", cfg.out, "output field (PTVOL1)");
    invert->add_option("--n", cfg.n, "output grid size (default: the data's sample count)");

    auto* recon = app.add_subcommand("reconstruct", "iterative reconstruction from S11 data");
    recon->add_option("--data", cfg.data, "S11 sinogram (PTSIN1)");
    recon->add_option("--truth", cfg.truth, "optional ground truth field for error logging");
    recon->add_option("--out", cfg.out, "final iterate (PTVOL1)");
    recon->add_option("--history", cfg.history, "history CSV (default <out>.history.csv)");
    recon->add_option("--heatmaps", cfg.heatmaps, "directory for mid-plane PPM slices");
    add_grid(recon, cfg);
    add_solver(recon, cfg);
    recon->add_option("--max-iters", cfg.max_iters, "largest iterate index");
    recon->add_option("--stop-tol", cfg.stop_tol, "relative update threshold");
    recon->add_option("--sigma", cfg.sigma, "weight exponent of the logged Fourier error");

    auto* norms = app.add_subcommand("norms", "weighted Fourier norms of a field or of ray data");
    norms->add_option("--in", cfg.in, "PTVOL1, PTSIN1 or PTLAM1 file");
    norms->add_option("--sigma", cfg.sigma, "weight exponent");
    norms->add_option("--order", cfg.order, "derivative order 0 or 1 (fields only)");

    auto* selftest = app.add_subcommand("selftest", "invariant suites at reduced resolution");
    selftest->add_flag("--quick", cfg.quick, "smaller subset");
    selftest->add_flag("--inject-fault", cfg.inject_fault, "perturb the inverse by 1% (suites must fail)");
    selftest->add_option("--seed", cfg.seed, "random seed");
    selftest->add_option("--sigma", cfg.sigma, "weight exponent for the norm suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_path.empty()) {
            std::set<std::string> known;
            for (const CLI::App* s : app.get_subcommands({}))
                for (const CLI::Option* o : s->get_options())
                    known.insert(o->get_single_name());
            apply_config(&app, sub, cfg, config_path, known);
        }
        if (cfg.threads > 0)
            thread_count_override() = static_cast<unsigned>(cfg.threads);

        const std::string name = sub->get_name();
        if (name == "phantom")
            return cmd_phantom(cfg, std::cout);
        if (name == "forward")
            return cmd_forward(cfg, std::cout);
        if (name == "transverse")
            return cmd_transverse(cfg, std::cout);
        if (name == "invert-j")
            return cmd_invert_j(cfg, std::cout);
        if (name == "reconstruct")
            return cmd_reconstruct(cfg, std::cout);
        if (name == "norms")
            return cmd_norms(cfg, std::cout);
        return cmd_selftest(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
