#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "options.hpp"
#include "ptbcc/baselines.hpp"
#include "ptbcc/dataset.hpp"
#include "ptbcc/error.hpp"
#include "ptbcc/evaluation.hpp"
#include "ptbcc/hyperparams.hpp"
#include "ptbcc/inference.hpp"
#include "ptbcc/methods.hpp"
#include "ptbcc/synthetic.hpp"

namespace ptbcc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOrigin = "cli";

struct Context {
  json config;
  std::ostream& out;
  std::ostream& err;
  fs::path output;
};

struct Command {
  std::string name;
  std::string description;
  std::vector<Key> keys;
  /// Does the work and returns command-specific summary fields.
  std::function<json(Context&)> handler;
};

void write_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, kOrigin, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, kOrigin, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, kOrigin, "cannot rename into '" + path.string() + "': " + ec.message());
}

std::string str(const Context& c, const char* key) { return c.config.at(key).get<std::string>(); }

std::vector<Key> hyperparameter_keys() {
  const json defaults = to_json(Hyperparams{});
  return {
      {"s", Kind::Count, defaults["s"], "number of prototypes"},
      {"e", Kind::Real, defaults["e"], "prototype seed weight e"},
      {"f", Kind::Real, defaults["f"], "accurate prototype diagonal weight f"},
      {"m", Kind::Real, defaults["m"], "random prototype off-diagonal weight m"},
      {"xi", Kind::Real, defaults["xi"], "convergence threshold on phi"},
      {"beta_scale", Kind::Real, defaults["beta_scale"], "worker-mix prior scale"},
      {"a_scale", Kind::Real, defaults["a_scale"], "prototype prior scale"},
      {"max_iter", Kind::Count, defaults["max_iter"], "sweep cap"},
      {"seed", Kind::Count, defaults["seed"], "seed for every random draw"},
      {"extra_prototype_mode", Kind::String, defaults["extra_prototype_mode"],
       "uniform_dirichlet or flat_ran"},
  };
}

std::vector<Key> ds_keys() {
  const DawidSkeneOptions d;
  return {{"ds_tol", Kind::Real, d.tol, "Dawid-Skene posterior change tolerance"},
          {"ds_max_iter", Kind::Count, d.max_iter, "Dawid-Skene EM iteration cap"}};
}

std::vector<Key> dataset_keys(bool truths_required) {
  return {{"answers", Kind::String, nullptr, "answers CSV (question,worker,answer)"},
          {"truths", Kind::String, truths_required ? json(nullptr) : json(""),
           "truth CSV (question,truth)"},
          {"duplicates", Kind::String, "reject", "duplicate (task, worker) policy: reject or keep_last"}};
}

std::vector<Key> concat(std::initializer_list<std::vector<Key>> parts) {
  std::vector<Key> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  all.push_back({"output", Kind::String, nullptr, "output directory"});
  return all;
}

Hyperparams hyperparams_of(const json& config) {
  Hyperparams hp;
  json overrides = json::object();
  for (const auto& key : hyperparameter_keys()) overrides[key.name] = config.at(key.name);
  apply_overrides(hp, overrides);
  hp.validate();
  return hp;
}

DawidSkeneOptions ds_options_of(const json& config) {
  DawidSkeneOptions o;
  o.tol = config.at("ds_tol").get<double>();
  o.max_iter = config.at("ds_max_iter").get<std::size_t>();
  if (!(o.tol > 0.0) || o.max_iter < 1)
    throw Error(ErrorKind::Config, kOrigin, "ds_tol must be positive and ds_max_iter at least 1");
  return o;
}

Dataset load(const Context& c) {
  BuildOptions opts;
  const auto policy = str(c, "duplicates");
  if (policy == "keep_last") opts.duplicates = DuplicatePolicy::KeepLast;
  else if (policy != "reject")
    throw Error(ErrorKind::Config, kOrigin, "duplicates must be reject or keep_last, got '" + policy + "'");
  const auto truths = str(c, "truths");
  return load_dataset(str(c, "answers"), truths.empty() ? std::nullopt : std::optional(truths), opts);
}

bool has_truth(const Dataset& d) {
  for (const auto& t : d.evaluable_truths())
    if (t) return true;
  return false;
}

std::string posterior_csv(const Dataset& d, const Matrix& posterior) {
  std::ostringstream out;
  out.precision(17);
  out << "question";
  for (const auto& c : d.class_ids().names()) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < d.num_tasks(); ++i) {
    out << d.task_ids().name(i);
    for (double x : posterior.row(i)) out << ',' << x;
    out << '\n';
  }
  return out.str();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

json infer(Context& c) {
  const Method method = parse_method(str(c, "method"));
  const Hyperparams hp = hyperparams_of(c.config);
  const DawidSkeneOptions ds = ds_options_of(c.config);
  const bool export_posteriors_flag = c.config.at("export_posteriors").get<bool>();
  const bool verbose = c.config.at("verbose").get<bool>();
  const Dataset d = load(c);

  json summary;
  std::vector<std::size_t> predictions;
  std::vector<std::pair<std::string, std::string>> extra_files;
  if (method == Method::Ptbcc) {
    FitOptions options;
    if (verbose) {
      options.on_sweep = [&](const SweepReport& r) {
        c.err << "sweep " << r.iteration << " elbo " << r.elbo << " max_dphi " << r.max_phi_change << '\n';
      };
    }
    const auto result = fit(d, hp, options);
    predictions = result.predictions;
    summary["iterations"] = result.iterations;
    summary["converged"] = result.converged;
    summary["elbo_trace"] = result.elbo_trace;
    if (export_posteriors_flag) {
      extra_files.emplace_back("posteriors.json", export_posteriors(result, d).dump(2) + "\n");
      for (auto& f : export_posterior_csvs(result, d)) extra_files.push_back(std::move(f));
    }
  } else {
    const auto r = method == Method::MajorityVote ? majority_vote(d) : dawid_skene(d, ds);
    predictions = r.predictions;
    summary["iterations"] = r.iterations;
    summary["converged"] = r.converged;
    summary["elbo_trace"] = json::array();
    if (method == Method::DawidSkene) summary["objective_trace"] = r.log_likelihood_trace;
    if (export_posteriors_flag) {
      const json doc = {{"method", to_string(method)},
                        {"classes", d.class_ids().names()},
                        {"tasks", d.task_ids().names()},
                        {"phi", matrix_json(r.posterior)}};
      extra_files.emplace_back("posteriors.json", doc.dump(2) + "\n");
      extra_files.emplace_back("phi.csv", posterior_csv(d, r.posterior));
    }
  }

  std::ostringstream csv;
  write_predictions_csv(csv, d, predictions);
  write_atomic(c.output / "predictions.csv", csv.str());
  json files = {"predictions.csv"};
  for (const auto& [name, contents] : extra_files) {
    write_atomic(c.output / name, contents);
    files.push_back(name);
  }
  summary["files"] = files;
  summary["dataset"] = {{"tasks", d.num_tasks()}, {"workers", d.num_workers()},
                        {"classes", d.num_classes()}, {"annotations", d.num_annotations()}};
  if (has_truth(d)) {
    summary["accuracy"] = accuracy(d, predictions);
    c.out << "accuracy " << summary["accuracy"].get<double>() << '\n';
  }
  return summary;
}

json eval(Context& c) {
  const Dataset d = load(c);
  const auto predictions = load_external_predictions(str(c, "predictions"), d);
  const auto truths = d.evaluable_truths();
  std::size_t evaluated = 0, predicted = 0;
  for (std::size_t i = 0; i < d.num_tasks(); ++i) {
    evaluated += truths[i].has_value();
    predicted += predictions[i].has_value();
  }
  const json result = {{"accuracy", accuracy(predictions, truths)},
                       {"truth_tasks", evaluated},
                       {"predicted_tasks", predicted}};
  write_atomic(c.output / "eval.json", result.dump(2) + "\n");
  c.out << "accuracy " << result["accuracy"].get<double>() << '\n';
  json summary = result;
  summary["files"] = {"eval.json"};
  return summary;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) items.push_back(item);
  return items;
}

double parse_real(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, kOrigin, what + ": '" + text + "' is not a number");
}

json synth(Context& c) {
  const auto count = [&](const char* key) { return c.config.at(key).get<std::size_t>(); };
  std::vector<std::pair<double, double>> prototypes;
  for (const auto& item : split_list(str(c, "prototypes"))) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::Config, kOrigin, "prototypes entries must look like diag:off, got '" + item + "'");
    prototypes.emplace_back(parse_real(item.substr(0, colon), "prototypes"),
                            parse_real(item.substr(colon + 1), "prototypes"));
  }
  auto cfg = SyntheticConfig::symmetric(count("tasks"), count("workers"), count("classes"),
                                        count("labels_per_task"), prototypes);
  const auto beta = str(c, "beta");
  if (!beta.empty()) {
    cfg.beta.clear();
    for (const auto& item : split_list(beta)) cfg.beta.push_back(parse_real(item, "beta"));
    if (cfg.beta.size() != prototypes.size())
      throw Error(ErrorKind::Config, kOrigin, "beta needs one entry per prototype");
  }
  cfg.u.assign(cfg.num_classes, c.config.at("u").get<double>());
  const auto data = generate_synthetic(cfg, c.config.at("seed").get<std::uint64_t>());

  std::ostringstream answers, truths;
  write_answers_csv(answers, data.dataset);
  write_truths_csv(truths, data.dataset);
  write_atomic(c.output / "answers.csv", answers.str());
  write_atomic(c.output / "truths.csv", truths.str());
  write_atomic(c.output / "ground_truth.json", to_json(data.truth, data.dataset).dump(2) + "\n");
  return {{"files", {"answers.csv", "truths.csv", "ground_truth.json"}},
          {"annotations", data.dataset.num_annotations()}};
}

json bench(Context& c) {
  const Hyperparams hp = hyperparams_of(c.config);
  const DawidSkeneOptions ds = ds_options_of(c.config);
  std::vector<Method> methods;
  for (const auto& name : split_list(str(c, "methods"))) methods.push_back(parse_method(name));
  const auto reps = c.config.at("repetitions").get<std::size_t>();
  if (reps < 1) throw Error(ErrorKind::Config, kOrigin, "repetitions must be at least 1");
  const Dataset d = load(c);
  std::string name = str(c, "dataset_name");
  if (name.empty()) name = fs::path(str(c, "answers")).stem().string();

  std::vector<BenchmarkRow> rows;
  for (const auto m : methods) {
    const double seconds = benchmark([&] { run_method(m, d, hp, ds); }, reps);
    rows.push_back({name, std::string(to_string(m)), seconds});
  }
  std::ostringstream csv;
  write_benchmark_csv(csv, rows);
  write_atomic(c.output / "bench.csv", csv.str());
  c.out << csv.str();
  json timings = json::object();
  for (const auto& r : rows) timings[r.method] = r.seconds;
  return {{"files", {"bench.csv"}}, {"seconds", timings}};
}

json compare(Context& c) {
  std::ifstream in(str(c, "runs"));
  if (!in) throw Error(ErrorKind::Io, kOrigin, "cannot open '" + str(c, "runs") + "'");
  const auto report = compare_methods(parse_method_runs(in), str(c, "reference"));
  const auto text = to_text(report);
  write_atomic(c.output / "report.json", to_json(report).dump(2) + "\n");
  write_atomic(c.output / "report.txt", text);
  c.out << text;
  return {{"files", {"report.json", "report.txt"}}};
}

std::vector<Command> commands() {
  return {
      {"infer", "aggregate annotations with ptbcc, mv or ds",
       concat({dataset_keys(false),
               {{"method", Kind::String, "ptbcc", "ptbcc, mv or ds"},
                {"export_posteriors", Kind::Flag, false, "also write posterior JSON and CSV files"},
                {"verbose", Kind::Flag, false, "log one line per sweep to stderr"}},
               hyperparameter_keys(), ds_keys()}),
       infer},
      {"eval", "score a question,predicted file against truths",
       concat({dataset_keys(true), {{"predictions", Kind::String, nullptr, "predictions CSV (question,predicted)"}}}),
       eval},
      {"synth", "sample a dataset from the generative model",
       concat({{{"tasks", Kind::Count, 200, "number of tasks"},
                {"workers", Kind::Count, 30, "number of workers"},
                {"classes", Kind::Count, 5, "number of classes"},
                {"labels_per_task", Kind::Count, 5, "distinct workers per task"},
                {"prototypes", Kind::String, "20:1,10:10", "per-prototype diag:off Dirichlet concentrations"},
                {"beta", Kind::String, "", "worker-mix prior, one entry per prototype (default all 1)"},
                {"u", Kind::Real, 1.0, "symmetric truth prior concentration"},
                {"seed", Kind::Count, 0, "sampling seed"}}}),
       synth},
      {"bench", "time methods on one dataset",
       concat({dataset_keys(false),
               {{"methods", Kind::String, "ptbcc,mv,ds", "comma-separated methods"},
                {"repetitions", Kind::Count, 3, "runs per method (median reported)"},
                {"dataset_name", Kind::String, "", "dataset label in the CSV (default: answers file stem)"}},
               hyperparameter_keys(), ds_keys()}),
       bench},
      {"compare", "significance report of methods against a reference",
       concat({{{"runs", Kind::String, nullptr, "CSV dataset,method,accuracy[,seconds]"},
                {"reference", Kind::String, "mv", "reference method name"}}}),
       compare},
  };
}

void report_error(std::ostream& err, std::string_view kind, std::string_view origin,
                  std::optional<std::size_t> line, const std::string& message) {
  const json doc = {{"error",
                     {{"kind", kind},
                      {"origin", origin},
                      {"line", line ? json(*line) : json(nullptr)},
                      {"message", message}}}};
  err << doc.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto table = commands();
  CLI::App app{"Truth inference for multi-class crowdsourced annotations", "ptbcc"};
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::string config_path;
    std::map<std::string, std::string> raw;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Bound> bound(table.size());
  for (std::size_t n = 0; n < table.size(); ++n) {
    auto& b = bound[n];
    b.sub = app.add_subcommand(table[n].name, table[n].description);
    b.sub->add_option("--config", b.config_path, "flat JSON config; flags override it");
    for (const auto& key : table[n].keys) {
      std::string help = key.help;
      if (!key.fallback.is_null() && key.kind != Kind::Flag) help += " [default: " + key.fallback.dump() + "]";
      if (key.kind == Kind::Flag)
        b.options[key.name] = b.sub->add_flag(flag_name(key.name), b.flags[key.name], help);
      else
        b.options[key.name] = b.sub->add_option(flag_name(key.name), b.raw[key.name], help);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, to_string(ErrorKind::Config), kOrigin, std::nullopt, e.what());
    return 2;
  }

  for (std::size_t n = 0; n < table.size(); ++n) {
    auto& b = bound[n];
    if (!b.sub->parsed()) continue;
    const auto start = std::chrono::steady_clock::now();
    try {
      std::map<std::string, std::string> given;
      for (const auto& [name, option] : b.options) {
        if (option->count() == 0) continue;
        given[name] = b.flags.count(name) ? "true" : b.raw[name];
      }
      Context ctx{resolve(table[n].keys, b.config_path, given), out, err, {}};
      ctx.output = fs::path(str(ctx, "output"));
      if (table[n].name == "infer" || table[n].name == "bench") hyperparams_of(ctx.config);
      fs::create_directories(ctx.output);
      json summary = table[n].handler(ctx);
      summary["command"] = table[n].name;
      summary["config"] = ctx.config;
      summary["wall_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_atomic(ctx.output / "summary.json", summary.dump(2) + "\n");
      return 0;
    } catch (const Error& e) {
      report_error(err, to_string(e.kind()), e.origin(), e.line(), e.message());
      return e.kind() == ErrorKind::Config ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
      report_error(err, to_string(ErrorKind::Io), kOrigin, std::nullopt, e.what());
      return 1;
    } catch (const std::exception& e) {
      report_error(err, "internal", kOrigin, std::nullopt, e.what());
      return 1;
    }
  }
  return 2;
}

}  // namespace ptbcc::cli
