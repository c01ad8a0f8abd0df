// modescope: Monte-Carlo harness for delay-embedded mode decomposition.
//
// Subcommands:
//   sweep     hit-probability sweep of one working-point parameter
//   cdf-spur  pooled spurious-eigenvalue magnitude CDFs across lags
//   auc       normalized area under saved hit-probability curves
//   verify    operator-identity battery; nonzero exit on any failure

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "modescope/modescope.hpp"
#include "modescope/svg.hpp"

namespace {

using namespace modescope;

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:n" -> n points linearly spaced from a to b.
  const size_t c1 = text.find(':');
  const size_t c2 = text.find(':', c1 + 1);
  require(c1 != std::string::npos && c2 != std::string::npos,
          "grid must have the form a:b:n");
  const double a = std::stod(text.substr(0, c1));
  const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  const long n = std::stol(text.substr(c2 + 1));
  require(n >= 1, "grid needs at least one point");
  require(n == 1 || b > a, "grid must be increasing");
  std::vector<double> grid;
  for (long i = 0; i < n; ++i)
    grid.push_back(n == 1 ? a
                          : a + (b - a) * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
  return grid;
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  require(!out.empty(), "expected a comma-separated list of integers");
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  return config_from_json(j);
}

std::vector<PlotSeries> sweep_series(const SweepResult& sweep) {
  std::vector<PlotSeries> series;
  for (size_t mi = 0; mi < sweep.methods.size(); ++mi) {
    PlotSeries s;
    s.name = method_name(sweep.methods[mi]);
    for (size_t g = 0; g < sweep.points.size(); ++g) {
      s.x.push_back(sweep.points[g].param_value);
      s.y.push_back(sweep.points[g].hit_prob(mi));
    }
    series.push_back(std::move(s));
  }
  return series;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo order detection for delay-embedded mode decomposition"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", grid_text, param_name = "snr";
  std::string lgrid_text = "2,8,32,64", sweep_in, scores_out;
  Index trials = 0, seeds = 10;
  std::uint64_t seed = 0;
  bool seed_set = false, trials_set = false, no_svg = false;
  int threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (defaults apply otherwise)");
    cmd->add_option("--trials", trials, "Monte-Carlo trials per grid point")
        ->each([&](const std::string&) { trials_set = true; });
    cmd->add_option("--seed", seed, "master seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker cap (default: MODESCOPE_THREADS or hardware)");
    cmd->add_flag("--no-svg", no_svg, "skip the SVG plot next to the CSV");
  };

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "hit-probability parameter sweep");
  sweep_cmd->add_option("--param", param_name, "one of: snr, dtheta, rho, kappa, m, M, L")
      ->required();
  sweep_cmd->add_option("--grid", grid_text, "a:b:n linear grid")->required();
  sweep_cmd->add_option("--scores-out", scores_out,
                        "also write per-trial mode scores and labels to this CSV");
  add_common(sweep_cmd);

  CLI::App* cdf_cmd = app.add_subcommand("cdf-spur", "spurious eigenvalue magnitude CDFs");
  cdf_cmd->add_option("--L-grid", lgrid_text, "comma-separated lags (default 2,8,32,64)");
  add_common(cdf_cmd);

  CLI::App* auc_cmd = app.add_subcommand("auc", "normalized AUC of a saved sweep");
  auc_cmd->add_option("--in", sweep_in, "sweep.csv produced by the sweep subcommand")
      ->required();
  auc_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* verify_cmd = app.add_subcommand("verify", "operator-identity battery");
  verify_cmd->add_option("--seeds", seeds, "number of seeded instances");
  add_common(verify_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);

    if (sweep_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      cfg.validate();
      if (seed_set) cfg.master_seed = seed;
      const Index n_trials = trials_set ? trials : cfg.trials;
      const SweepParameter param = parse_sweep_parameter(param_name);
      const std::vector<double> grid = parse_grid(grid_text);
      const SweepResult sweep =
          run_sweep(cfg, param, grid, n_trials, threads, !scores_out.empty());

      const std::string csv_path = out_dir + "/sweep.csv";
      write_text_file(csv_path, sweep_csv(sweep));
      std::printf("wrote %s\n", csv_path.c_str());
      Index failures = 0;
      for (const SweepPoint& pt : sweep.points) failures += pt.failures;
      if (failures > 0)
        std::fprintf(stderr, "note: %lld trials failed and were excluded\n",
                     static_cast<long long>(failures));
      if (!scores_out.empty()) {
        write_text_file(scores_out, scores_csv(sweep));
        std::printf("wrote %s\n", scores_out.c_str());
      }
      if (!no_svg) {
        const std::string svg_path = out_dir + "/sweep.svg";
        write_text_file(svg_path,
                        line_plot_svg(std::string("hit probability vs ") +
                                          sweep_parameter_name(param),
                                      sweep_parameter_name(param), "hit probability",
                                      sweep_series(sweep)));
        std::printf("wrote %s\n", svg_path.c_str());
      }
      return 0;
    }

    if (cdf_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      cfg.validate();
      if (seed_set) cfg.master_seed = seed;
      const Index n_trials = trials_set ? trials : cfg.trials;
      const std::vector<Index> lgrid = parse_index_list(lgrid_text);
      const SpuriousCdf cdf = spurious_cdf(cfg, lgrid, n_trials, threads);

      const std::string csv_path = out_dir + "/cdf.csv";
      write_text_file(csv_path, cdf_csv(cdf));
      std::printf("wrote %s\n", csv_path.c_str());
      for (size_t li = 0; li < cdf.L_grid.size(); ++li)
        if (cdf.empty_pool[li])
          std::fprintf(stderr, "note: L=%lld pooled no spurious eigenvalues\n",
                       static_cast<long long>(cdf.L_grid[li]));
      if (!no_svg) {
        std::vector<PlotSeries> series;
        for (size_t li = 0; li < cdf.L_grid.size(); ++li) {
          if (cdf.empty_pool[li]) continue;
          PlotSeries s;
          s.name = "L=" + std::to_string(cdf.L_grid[li]);
          s.x = cdf.eval_points;
          s.y = cdf.cdf[li];
          series.push_back(std::move(s));
        }
        if (!series.empty()) {
          const std::string svg_path = out_dir + "/cdf.svg";
          write_text_file(svg_path,
                          line_plot_svg("spurious eigenvalue magnitude CDF",
                                        "|lambda|", "CDF", series));
          std::printf("wrote %s\n", svg_path.c_str());
        }
      }
      return 0;
    }

    if (auc_cmd->parsed()) {
      std::ifstream in(sweep_in);
      require(static_cast<bool>(in), "cannot open " + sweep_in);
      const SweepResult sweep = read_sweep_csv(in);
      const std::string csv_path = out_dir + "/auc.csv";
      write_text_file(csv_path, auc_csv(compute_auc(sweep)));
      std::printf("wrote %s\n", csv_path.c_str());
      return 0;
    }

    if (verify_cmd->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      cfg.validate();
      if (seed_set) cfg.master_seed = seed;
      const VerifyReport report = run_verify(cfg, seeds);
      const nlohmann::json j = to_json(report);
      const std::string json_path = out_dir + "/verify.json";
      write_text_file(json_path, j.dump(2) + "\n");
      for (const VerifyCheck& c : report.checks)
        std::printf("%-28s %s  max_error=%.3g  tol=%.3g%s%s\n", c.name.c_str(),
                    c.pass ? "pass" : "FAIL", c.max_error, c.tolerance,
                    c.note.empty() ? "" : "  ", c.note.c_str());
      std::printf("wrote %s\n", json_path.c_str());
      return report.all_pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
