// paneitz: command-line front end.
//
//   paneitz [global flags] <command> [command flags]
//
// Artifacts and manifest.json land in --out, else $PANEITZ_OUT, else the
// config's "out" entry.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "paneitz/commands.hpp"
#include "paneitz/config.hpp"

namespace {

struct Globals {
    std::string config;
    std::string out;
    std::optional<int> grid;
    std::optional<double> q, c, profile_c, smax;
    std::optional<int> imax;
    std::optional<unsigned long long> seed;
};

paneitz::RunConfig build_config(const Globals& g)
{
    auto cfg = g.config.empty() ? paneitz::RunConfig{} : paneitz::RunConfig::load(g.config);
    if (const char* env = std::getenv("PANEITZ_OUT"); env && *env) cfg.out = env;
    if (!g.out.empty()) cfg.out = g.out;
    if (g.grid) cfg.gridsize = *g.grid;
    if (g.q) cfg.q = *g.q;
    if (g.c) cfg.coefficients = {{"source", "builtin"}, {"c", *g.c}};
    if (g.profile_c) cfg.profile["c"] = *g.profile_c;
    if (g.imax) cfg.i_max = *g.imax;
    if (g.smax) cfg.s_max = *g.smax;
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bifurcation toolkit for fourth-order Paneitz-type ODEs on isoparametric foliations"};
    app.set_version_flag("--version", std::string(paneitz::kVersion));
    app.require_subcommand(1);

    Globals g;
    paneitz::CommandOptions o;
    app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory (overrides PANEITZ_OUT and the config)");
    app.add_option("--grid", g.grid, "finite-volume cells for the spectrum");
    app.add_option("--q", g.q, "nonlinearity exponent q > 1");
    app.add_option("--c", g.c, "use the builtin path alpha = s, beta = c s^2");
    app.add_option("--profile-c", g.profile_c, "c of the sphere profile");
    app.add_option("--imax", g.imax, "number of bifurcation instants");
    app.add_option("--smax", g.smax, "continuation end (0: 3 s_i)");
    app.add_option("--seed", g.seed, "seed for randomized sweeps");
    app.add_flag("--timings", o.timings, "record stage timings in the manifest");

    auto add_s = [&](CLI::App* sc) { sc->add_option("--s", o.s, "path parameter"); };
    auto add_ab = [&](CLI::App* sc) {
        sc->add_option("--a", o.a, "u(0)");
        sc->add_option("--b", o.b, "v2(0) = (1 + j0) u''(0)");
    };
    auto add_rect = [&](CLI::App* sc) {
        sc->add_option("--cells", o.cells, "cells per axis")->capture_default_str();
        sc->add_option("--a-min", o.rect.a_min)->capture_default_str();
        sc->add_option("--a-max", o.rect.a_max)->capture_default_str();
        sc->add_option("--b-min", o.rect.b_min)->capture_default_str();
        sc->add_option("--b-max", o.rect.b_max)->capture_default_str();
    };

    auto* coeffs = app.add_subcommand("coeffs", "alpha, beta, Q of an Einstein product");
    coeffs->add_option("--n", o.n);
    coeffs->add_option("--m", o.m);
    coeffs->add_option("--lambda0", o.lambda0);
    coeffs->add_option("--lambda1", o.lambda1);
    add_s(coeffs);

    auto* spectra = app.add_subcommand("spectrum", "eigenvalues of the reduced Laplacian");
    spectra->add_option("--count", o.count, "eigenvalues beyond lambda_0")->capture_default_str();
    spectra->add_flag("--eigenfunctions", o.eigenfunctions, "also write eigenfunctions.csv");

    app.add_subcommand("bifurcation-points", "instants s_i where phi(s) = lambda_i");

    auto* sh = app.add_subcommand("shoot", "integrate from t = 0 and report the far-end defect");
    add_ab(sh);
    add_s(sh);
    sh->add_flag("--trajectory", o.trajectory, "write trajectory.csv");

    auto* sc = app.add_subcommand("scan", "residual sign pattern over an (a, b) rectangle");
    add_rect(sc);
    add_s(sc);

    auto* so = app.add_subcommand("solve", "Newton shooting from a guess");
    add_ab(so);
    add_s(so);

    auto* br = app.add_subcommand("branch", "continue the branch born at s_i");
    br->add_option("--index", o.index, "i")->capture_default_str();

    app.add_subcommand("diagram", "SVG bifurcation diagram");

    auto* ap = app.add_subcommand("verify-appendix", "closed forms of alpha^2 - 4 beta at Lambda1 = Lambda0");
    ap->add_option("--n", o.n);
    ap->add_option("--m", o.m);
    ap->add_option("--lambda0", o.lambda0);

    auto* ne = app.add_subcommand("nonexistence-scan", "scan expecting no nontrivial candidate");
    add_rect(ne);
    add_s(ne);

    auto* va = app.add_subcommand("verify-all", "run every acceptance criterion");
    va->add_option("--criteria", o.criteria, "subset of criterion ids")->check(CLI::Range(1, 11));
    va->add_option("--trials", o.trials, "certificate trials")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : paneitz::Exit::usage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    paneitz::RunConfig cfg;
    try {
        cfg = build_config(g);
    } catch (const paneitz::ConfigError& e) {
        std::string out = g.out;
        if (const char* env = std::getenv("PANEITZ_OUT"); out.empty() && env && *env) out = env;
        if (out.empty()) out = paneitz::RunConfig{}.out;
        return paneitz::report_config_error(out, command, e.what(), std::cerr);
    }
    return paneitz::run_command(cfg, command, o, std::cout);
}
