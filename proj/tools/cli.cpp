#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "genet/cost_model.hpp"
#include "genet/error.hpp"
#include "genet/io.hpp"
#include "genet/llr_nas.hpp"
#include "genet/rank.hpp"
#include "genet/structure.hpp"

namespace genet::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::string out_path;
  bool pretty = false;
};

class Context {
 public:
  Context(const Globals& globals, std::ostream& out, std::ostream& err) : globals_(globals), out_(out), err_(err) {}

  void emit(std::string_view data) const {
    if (globals_.out_path.empty()) {
      out_ << data;
    } else {
      write_text_file(globals_.out_path, data);
    }
  }

  [[nodiscard]] bool pretty() const { return globals_.pretty; }
  [[nodiscard]] std::ostream& err() const { return err_; }

 private:
  const Globals& globals_;
  std::ostream& out_;
  std::ostream& err_;
};

void add_range_options(CLI::App* cmd, PerturbationRanges& ranges) {
  cmd->add_option("--kernels", ranges.kernel_choices, "Kernel sizes to draw from")->delimiter(',');
  cmd->add_option("--width-factor", [&ranges](const CLI::results_t& r) {
       if (r.size() != 2) return false;
       ranges.width_factor_min = std::stod(r[0]);
       ranges.width_factor_max = std::stod(r[1]);
       return true;
     }, "Width factor interval MIN,MAX")
      ->expected(2)
      ->delimiter(',');
  cmd->add_option("--depth-delta", [&ranges](const CLI::results_t& r) {
       if (r.size() != 2) return false;
       ranges.depth_delta_min = std::stoi(r[0]);
       ranges.depth_delta_max = std::stoi(r[1]);
       return true;
     }, "Depth delta interval MIN,MAX")
      ->expected(2)
      ->delimiter(',');
  cmd->add_option("--bl-ratios", ranges.bl_ratios, "BL bottleneck ratios")->delimiter(',');
  cmd->add_option("--dw-ratios", ranges.dw_ratios, "DW expansion ratios")->delimiter(',');
  cmd->add_option("--samples", ranges.samples_per_superblock, "Trials per body super-block");
  cmd->add_option("--width-quantum", ranges.width_quantum, "Sampled widths are multiples of this");
  cmd->add_flag("--allow-type-switch", ranges.allow_type_switch, "Draw block types from {XX, BL, DW}");
}

NetworkStructure load_checked(const std::string& path) { return parse_structure(read_text_file(path)); }

// --- validate -------------------------------------------------------------------

int cmd_validate(const Context& ctx, const std::string& path) {
  const auto net = parse_structure_unchecked(read_text_file(path));
  const auto violations = validate_structure(net);
  std::ostringstream data;
  if (ctx.pretty()) {
    if (violations.empty()) data << net.name << ": OK\n";
    for (const auto& v : violations) {
      data << std::left << std::setw(18) << to_string(v.rule) << ' '
           << (v.index ? "super-block " + std::to_string(*v.index) : std::string("network")) << "  " << v.message
           << '\n';
    }
  } else {
    json list = json::array();
    for (const auto& v : violations) {
      list.push_back(json{{"rule", to_string(v.rule)},
                          {"index", v.index ? json(*v.index) : json(nullptr)},
                          {"message", v.message}});
    }
    data << list.dump(2) << '\n';
  }
  ctx.emit(data.str());
  for (const auto& v : violations) {
    ctx.err() << to_string(v.rule);
    if (v.index) ctx.err() << " [" << *v.index << "]";
    ctx.err() << ": " << v.message << '\n';
  }
  return violations.empty() ? kSuccess : kDomainError;
}

// --- cost -------------------------------------------------------------------------

struct CostArgs {
  std::string structure;
  std::optional<int> resolution;
  std::string latency_table;
  int batch = 64;
  std::string reference;
};

int cmd_cost(const Context& ctx, const CostArgs& args) {
  const auto net = load_checked(args.structure);
  const int resolution = args.resolution.value_or(net.resolution);
  std::optional<LatencyTable> table;
  if (!args.latency_table.empty()) table = ingest_benchmark(read_text_file(args.latency_table));
  const auto report = cost_report(net, resolution, args.batch, table ? &*table : nullptr);
  std::optional<ReferenceLatency> reference;
  if (!args.reference.empty()) {
    reference = find_reference(ingest_reference_latencies(read_text_file(args.reference)), net.name, args.batch);
  }

  std::ostringstream data;
  if (ctx.pretty()) {
    data << std::left << std::setw(22) << "network" << net.name << '\n'
         << std::setw(22) << "resolution" << report.resolution << '\n'
         << std::setw(22) << "FLOPs (MAC)" << std::fixed << std::setprecision(1)
         << static_cast<double>(report.flops) / 1e6 << " M\n"
         << std::setw(22) << "params" << static_cast<double>(report.params) / 1e6 << " M\n";
    if (report.latency_ms_per_image) {
      data << std::setw(22) << "latency (ms/image)" << std::setprecision(4) << *report.latency_ms_per_image
           << (report.latency_extrapolated ? "  (extrapolated)" : "") << "  @batch " << report.batch << '\n';
    }
    if (reference) {
      data << std::setw(22) << "reference (ms/image)" << std::setprecision(2) << reference->latency_ms
           << "  @batch " << reference->batch << '\n';
    }
  } else {
    json root{{"name", net.name},
              {"resolution", report.resolution},
              {"batch", report.batch},
              {"flops", report.flops},
              {"params", report.params}};
    if (report.latency_ms_per_image) {
      root["latency_ms_per_image"] = *report.latency_ms_per_image;
      root["latency_extrapolated"] = report.latency_extrapolated;
    }
    if (reference) root["reference_latency_ms"] = reference->latency_ms;
    data << root.dump(2) << '\n';
  }
  ctx.emit(data.str());
  if (report.latency_extrapolated) {
    ctx.err() << "warning: latency extrapolated beyond the table's width range\n";
  }
  return kSuccess;
}

// --- bench-aggregate -------------------------------------------------------------

int cmd_bench_aggregate(const Context& ctx, const std::string& path) {
  const auto table = aggregate_samples(read_benchmark_samples(read_text_file(path)));
  ctx.emit(write_benchmark(table));
  return kSuccess;
}

// --- LLR-NAS steps ------------------------------------------------------------------

int cmd_plan(const Context& ctx, const std::string& master_path, const PerturbationRanges& ranges,
             std::uint64_t seed) {
  const auto trials = plan_trials(load_checked(master_path), ranges, seed);
  ctx.emit(write_trials(trials));
  ctx.err() << "planned " << trials.size() << " trials\n";
  return kSuccess;
}

struct FitArgs {
  std::string master;
  std::string trials;
  double master_accuracy = 0.0;
  int fine_groups = 0;
};

int cmd_fit(const Context& ctx, const FitArgs& args) {
  const auto master = load_checked(args.master);
  const auto trials = ingest_trials(read_text_file(args.trials));
  const auto table = fit_pseudo_gradients(master, args.master_accuracy, trials, FitOptions{args.fine_groups});
  ctx.emit(serialize_gradients(table));
  for (const auto& e : table.entries) {
    if (e.singular) ctx.err() << "warning: super-block " << e.index << " " << to_string(e.type) << " is SINGULAR\n";
  }
  return kSuccess;
}

int cmd_predict(const Context& ctx, const std::string& gradients, const std::string& master_path,
                const std::string& candidate_path) {
  const auto table = parse_gradients(read_text_file(gradients));
  const auto master = load_checked(master_path);
  const auto candidate = load_checked(candidate_path);
  const double accuracy = predict_accuracy(table, master, candidate);
  if (ctx.pretty()) {
    std::ostringstream data;
    data << candidate.name << ": predicted accuracy " << std::fixed << std::setprecision(4) << accuracy << '\n';
    ctx.emit(data.str());
  } else {
    ctx.emit(json{{"name", candidate.name}, {"predicted_accuracy", accuracy}}.dump(2) + "\n");
  }
  return kSuccess;
}

struct SearchArgs {
  std::string master;
  std::string gradients;
  std::string latency_table;
  SearchConfig config;
};

int cmd_search(const Context& ctx, const SearchArgs& args) {
  const auto master = load_checked(args.master);
  const auto table = parse_gradients(read_text_file(args.gradients));
  const auto latency = ingest_benchmark(read_text_file(args.latency_table));
  const auto results = run_search(master, table, latency, args.config);

  if (ctx.pretty()) {
    std::ostringstream data;
    data << "resolution  feasible  candidate  predicted_acc  latency_ms\n";
    for (const auto& r : results) {
      data << std::setw(10) << r.resolution << std::setw(10) << r.feasible_count;
      if (r.feasible()) {
        data << std::setw(11) << *r.candidate_index << std::setw(15) << std::fixed << std::setprecision(5)
             << r.predicted_accuracy << std::setw(12) << r.estimated_latency_ms << '\n';
      } else {
        data << "  NO_FEASIBLE_CANDIDATE\n";
      }
    }
    ctx.emit(data.str());
  } else {
    ctx.emit(serialize_winner_report(results, args.config));
  }
  int code = kSuccess;
  for (const auto& r : results) {
    if (!r.feasible()) {
      ctx.err() << "NO_FEASIBLE_CANDIDATE: no candidate within " << args.config.latency_budget_ms << " ms at resolution "
                << r.resolution << '\n';
      code = kDomainError;
    }
  }
  return code;
}

// --- spectrum ---------------------------------------------------------------------------

int cmd_spectrum(const Context& ctx, const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".kt01") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kEmptyInput, "no .kt01 files in '" + dir + "'");
  std::vector<KernelTensor> kernels;
  for (const auto& f : files) kernels.push_back(load_kernel(f.string()));
  ctx.emit(stage_report(kernels));
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design, cost and search GPU-efficient convolutional networks", "genet"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  app.add_option("--out", globals.out_path, "Write the data output to PATH instead of stdout");
  app.add_flag("--pretty", globals.pretty, "Human-readable tables instead of JSON/CSV");

  std::function<int(const Context&)> action;

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a structure document against every invariant");
  validate->add_option("structure", validate_path)->required();
  validate->callback([&] { action = [&](const Context& c) { return cmd_validate(c, validate_path); }; });

  CostArgs cost_args;
  auto* cost = app.add_subcommand("cost", "FLOPs, parameters and (with a table) latency");
  cost->add_option("structure", cost_args.structure)->required();
  cost->add_option("--resolution", cost_args.resolution, "Input resolution (default: the document's)");
  cost->add_option("--latency-table", cost_args.latency_table, "Benchmark CSV");
  cost->add_option("--batch", cost_args.batch, "Batch size for latency lookup")->capture_default_str();
  cost->add_option("--reference", cost_args.reference, "Whole-network reference latency CSV");
  cost->callback([&] { action = [&](const Context& c) { return cmd_cost(c, cost_args); }; });

  std::string raw_path;
  auto* bench = app.add_subcommand("bench-aggregate", "Trimmed-mean raw timing samples into a benchmark CSV");
  bench->add_option("samples", raw_path)->required();
  bench->callback([&] { action = [&](const Context& c) { return cmd_bench_aggregate(c, raw_path); }; });

  std::string plan_master;
  PerturbationRanges plan_ranges;
  std::uint64_t plan_seed = 0;
  auto* plan = app.add_subcommand("plan", "Plan per-super-block perturbation trials");
  plan->add_option("master", plan_master)->required();
  plan->add_option("--seed", plan_seed, "Random seed")->required();
  add_range_options(plan, plan_ranges);
  plan->callback([&] {
    action = [&](const Context& c) { return cmd_plan(c, plan_master, plan_ranges, plan_seed); };
  });

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit pseudo-gradients from trial accuracies");
  fit->add_option("master", fit_args.master)->required();
  fit->add_option("--trials", fit_args.trials, "Trial CSV with accuracies")->required();
  fit->add_option("--master-accuracy", fit_args.master_accuracy, "Accuracy of the master network")->required();
  fit->add_option("--fine-groups", fit_args.fine_groups,
                  "Also fit per (kernel, ratio) groups with at least N trials (0 = off)");
  fit->callback([&] { action = [&](const Context& c) { return cmd_fit(c, fit_args); }; });

  std::string predict_gradients;
  std::string predict_master;
  std::string predict_candidate;
  auto* predict = app.add_subcommand("predict", "Predict a candidate's accuracy");
  predict->add_option("gradients", predict_gradients)->required();
  predict->add_option("master", predict_master)->required();
  predict->add_option("candidate", predict_candidate)->required();
  predict->callback([&] {
    action = [&](const Context& c) { return cmd_predict(c, predict_gradients, predict_master, predict_candidate); };
  });

  SearchArgs search_args;
  auto& cfg = search_args.config;
  auto* search = app.add_subcommand("search", "Generate candidates and select the best per resolution");
  search->add_option("master", search_args.master)->required();
  search->add_option("--gradients", search_args.gradients, "Pseudo-gradient JSON")->required();
  search->add_option("--latency-table", search_args.latency_table, "Benchmark CSV")->required();
  search->add_option("--budget", cfg.latency_budget_ms, "Latency budget, ms per image")->required();
  search->add_option("--seed", cfg.seed, "Random seed")->required();
  search->add_option("--candidates", cfg.num_candidates, "Number of random candidates")->capture_default_str();
  search->add_option("--resolutions", cfg.resolutions, "Input resolutions")->delimiter(',');
  search->add_option("--batch", cfg.batch, "Batch size")->capture_default_str();
  search->add_option("--threads", cfg.threads, "Evaluation threads")->capture_default_str();
  add_range_options(search, cfg.ranges);
  search->callback([&] { action = [&](const Context& c) { return cmd_search(c, search_args); }; });

  std::string kernel_dir;
  auto* spec = app.add_subcommand("spectrum", "Normalized singular-value spectra of KT01 kernels");
  spec->add_option("kernel_dir", kernel_dir)->required();
  spec->callback([&] { action = [&](const Context& c) { return cmd_spectrum(c, kernel_dir); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  const Context ctx(globals, out, err);
  try {
    return action(ctx);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
}

}  // namespace genet::cli
