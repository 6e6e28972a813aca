// vpyr: coverings, pyramid solutions, energies and figures from the command line.
#include <iostream>

#include <CLI11.hpp>

#include "vpyr/cli.hpp"

int main(int argc, char** argv) {
  vpyr::RunConfig cfg;
  CLI::App app{"Piecewise-affine solutions of Du in E with zero boundary data"};
  app.set_help_flag("--help", "print this help");
  app.add_option("command", cfg.command, "cover, build, verify, energy, accordion or plot")
      ->required()
      ->check(CLI::IsMember({"cover", "build", "verify", "energy", "accordion", "plot"}));
  app.add_option("--domain", cfg.domain, "domain spec (JSON)");
  app.add_option("--depth", cfg.depths, "pyramid depth, or a comma list for sweeps")->delimiter(',');
  app.add_option("--alpha", cfg.alphas, "weight exponent, or a comma list")->delimiter(',');
  app.add_option("--delta", cfg.deltas, "distances from the boundary to cut at (comma list)")->delimiter(',');
  app.add_option("--h", cfg.hs, "distances from the singular set to excise (comma list)")->delimiter(',');
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--seed", cfg.seed, "seed for sampling");
  app.add_option("--threads", cfg.threads, "worker threads");
  app.add_flag("--certify-tail", cfg.certify_tail, "fail unless the energy tail is certified");
  app.add_option("--max-squares", cfg.max_squares, "greedy squares per rectangle");
  app.add_option("--steps", cfg.steps, "triangle covering steps");
  app.add_option("--levels", cfg.levels, "Vitali covering levels");
  app.add_option("--samples", cfg.samples, "verification samples");
  app.add_option("--frames", cfg.frames, "accordion frames");
  app.add_option("--sequence", cfg.sequence, "accordion sequence: harmonic, shifted:<s>, geometric:<q>");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return vpyr::kInputError;
  }
  return vpyr::run_command(cfg, std::cout, std::cerr);
}
