// Command line front end: `ace <simulate|curate|train|eval|theory|pipeline>`.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ace/commands.hpp"
#include "ace/config.hpp"
#include "ace/io.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, CommonFlags& flags) {
  app->add_option("--config", flags.config_path, "config file of `key = value` lines");
  app->add_option("--seed", flags.seed, "global seed");
  app->add_option("--out", flags.out, "output directory");
  app->add_option("--set", flags.overrides, "override one key, as key=value")->take_all();
}

ace::cli::RunConfig resolve(const CommonFlags& flags) {
  ace::cli::RunConfig c;
  if (!flags.config_path.empty()) c = ace::cli::load_config(flags.config_path);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ace::Error("--set expects key=value, got '" + kv + "'");
    ace::cli::set_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out) c.out = *flags.out;
  return ace::cli::finalize(c);
}

ace::DatasetKind parse_kind(const std::string& s) {
  if (s == "ICE" || s == "ice") return ace::DatasetKind::kIce;
  if (s == "ACE" || s == "ace") return ace::DatasetKind::kAce;
  throw ace::Error("--kind must be ICE or ACE, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ICE vs ACE learning-to-rank experiment"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string log_path, kind = "ACE", dataset_path, ice_model, ace_model, path_out;
  bool show_config = false;

  auto* simulate = app.add_subcommand("simulate", "write the warm-up event log");
  auto* curate = app.add_subcommand("curate", "build an ICE or ACE dataset from an event log");
  curate->add_option("--log", log_path, "event log (default <out>/logs/events.tsv)");
  curate->add_option("--kind", kind, "ICE or ACE");
  curate->add_option("--output", path_out, "dataset path (default <out>/datasets/<kind>.txt)");
  auto* train = app.add_subcommand("train", "fit a LambdaRank GBDT on a dataset");
  train->add_option("--dataset", dataset_path, "dataset file")->required();
  train->add_option("--output", path_out, "model path (default <out>/models/<kind>.model)");
  auto* eval = app.add_subcommand("eval", "compare two models offline and in a simulated A/B test");
  eval->add_option("--ice-model", ice_model, "baseline model")->required();
  eval->add_option("--ace-model", ace_model, "treatment model")->required();
  auto* theory = app.add_subcommand("theory", "closed-form tables and Monte Carlo checks");
  auto* pipeline = app.add_subcommand("pipeline", "run every stage in sequence");
  for (auto* sub : {simulate, curate, train, eval, theory, pipeline}) add_common(sub, flags);
  app.add_flag("--show-config", show_config, "print the resolved config and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = resolve(flags);
    if (show_config) {
      for (const auto& [k, v] : ace::cli::describe(config)) std::cout << k << " = " << v << '\n';
      return 0;
    }
    const auto layout = ace::cli::layout_for(config.out);
    if (simulate->parsed()) {
      ace::cli::cmd_simulate(config, std::cout);
    } else if (curate->parsed()) {
      const auto k = parse_kind(kind);
      ace::cli::cmd_curate(log_path.empty() ? layout.events : std::filesystem::path(log_path), k,
                           config, path_out.empty() ? layout.dataset(k) : std::filesystem::path(path_out),
                           std::cout);
    } else if (train->parsed()) {
      auto out = path_out;
      if (out.empty()) {
        const auto ds = ace::io::read_text_file(dataset_path);
        const auto k = ds.rfind("# dataset kind=ICE", 0) == 0 ? ace::DatasetKind::kIce
                                                              : ace::DatasetKind::kAce;
        out = layout.model(k).string();
      }
      ace::cli::cmd_train(dataset_path, config, out, std::cout);
    } else if (eval->parsed()) {
      ace::cli::cmd_eval(ice_model, ace_model, config, std::cout);
    } else if (theory->parsed()) {
      return ace::cli::cmd_theory(config, std::cout).passed ? 0 : 2;
    } else if (pipeline->parsed()) {
      return ace::cli::cmd_pipeline(config, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
