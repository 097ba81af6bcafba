// trussred: command-line front end for limit analysis, worst-case damage
// evaluation and redundancy optimization of trusses.
//
// Exit codes:
//   0  success (limit analysis Optimal)
//   1  internal error
//   2  usage error
//   3  MechanismOrOverload (analyze, or a -inf worst case)
//   4  Unbounded load factor
//   5  input error (unreadable or malformed instance, design or config)
//   6  optimizer start design already unstable at the requested alpha

#include "trussred/format.hpp"
#include "trussred/instance_io.hpp"
#include "trussred/limit.hpp"
#include "trussred/render.hpp"
#include "trussred/sqp.hpp"
#include "trussred/threads.hpp"
#include "trussred/worstcase.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
using namespace trussred;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMechanism = 3;
constexpr int kExitUnbounded = 4;
constexpr int kExitInput = 5;
constexpr int kExitUnstableStart = 6;

constexpr int kReportSchema = 1;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Report numbers carry 6 significant digits; non-finite values become strings.
json num(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::strtod(format_number(v, 6).c_str(), nullptr);
}

json num_array(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

struct Common {
  std::string example;
  std::string instance_path;
  std::string design_path;
  std::string report_path;
  int threads = 0;
  bool no_timestamp = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_design = true) {
  auto* ex = cmd->add_option("--example", c.example, "Built-in example (I or II)");
  auto* in = cmd->add_option("-i,--instance", c.instance_path, "Instance file (JSON)");
  ex->excludes(in);
  in->excludes(ex);
  if (with_design) {
    cmd->add_option("--design", c.design_path,
                    "Design file whose initial_areas_mm2 replace the instance areas");
  }
  cmd->add_option("--report", c.report_path, "Write the report here instead of stdout");
  cmd->add_option("--threads", c.threads, "Parallel width (default: TRUSSRED_THREADS or all)");
  cmd->add_flag("--no-timestamp", c.no_timestamp, "Omit wall time and date from the report");
}

struct Loaded {
  Instance inst;
  json source;
};

Loaded load(const Common& c) {
  if (c.example.empty() && c.instance_path.empty()) {
    throw CLI::ValidationError("one of --example or --instance is required");
  }
  Loaded out{Instance{builtin_example(BuiltinExample::I)}, json::object()};
  if (!c.example.empty()) {
    BuiltinExample which;
    try {
      which = parse_example_name(c.example);
    } catch (const std::exception& e) {
      throw CLI::ValidationError("--example", e.what());
    }
    out.inst = builtin_example(which);
    out.source["example"] = example_name(which);
  } else {
    out.inst = parse_instance(read_file(c.instance_path));
    out.source["instance"] = c.instance_path;
  }
  if (!c.design_path.empty()) {
    const Instance d = parse_instance(read_file(c.design_path));
    if (d.design.areas.size() != out.inst.design.areas.size()) {
      throw InputError("design file has " + std::to_string(d.design.areas.size()) +
                       " areas, instance has " + std::to_string(out.inst.design.areas.size()) +
                       " members");
    }
    out.inst.design.areas = d.design.areas;
    out.source["design"] = c.design_path;
  }
  out.source["digest"] = fnv1a(dump_instance(out.inst.structure, out.inst.design));
  out.source["members"] = out.inst.structure.num_members();
  out.source["dofs"] = out.inst.structure.num_dofs();
  return out;
}

void apply_threads(const Common& c) {
  int n = c.threads;
  if (n <= 0) {
    if (const char* env = std::getenv("TRUSSRED_THREADS")) n = std::atoi(env);
  }
  set_max_threads(n);
}

json report_header(const char* mode, const Loaded& in) {
  json r;
  r["schema_version"] = kReportSchema;
  r["mode"] = mode;
  r["source"] = in.source;
  return r;
}

void finish(json& r, const Common& c, std::chrono::steady_clock::time_point start) {
  if (!c.no_timestamp) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r["wall_time_s"] = num(secs);
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    r["created"] = buf;
  }
  const std::string text = r.dump(2) + "\n";
  if (c.report_path.empty()) {
    std::cout << text;
  } else {
    write_file(c.report_path, text);
  }
}

int status_exit(LimitStatus s) {
  switch (s) {
    case LimitStatus::Optimal: return kExitOk;
    case LimitStatus::MechanismOrOverload: return kExitMechanism;
    case LimitStatus::Unbounded: return kExitUnbounded;
  }
  return kExitInternal;
}

int lambda_exit(double lambda) {
  if (lambda == -INFINITY) return kExitMechanism;
  if (lambda == INFINITY) return kExitUnbounded;
  return kExitOk;
}

json scenarios_json(const WorstCaseResult& w, bool full) {
  json worst = json::array();
  for (std::size_t idx : w.worst) worst.push_back(w.table[idx].damaged);
  json out;
  out["alpha"] = w.alpha;
  out["gamma"] = num(w.gamma);
  out["worst_lambda"] = num(w.worst_lambda);
  out["f"] = num(w.f_value);
  out["multiplicity"] = w.multiplicity();
  out["worst_scenarios"] = worst;
  out["early_exit"] = w.early_exit;
  out["scenarios_evaluated"] = w.table.size();
  if (full) {
    json table = json::array();
    for (const ScenarioValue& s : w.table) {
      table.push_back({{"damaged", s.damaged}, {"lambda", num(s.lambda)}});
    }
    out["table"] = table;
  }
  return out;
}

json config_json(const sqp::SqpConfig& cfg) {
  json j;
  j["radius"] = cfg.radius;
  j["radius_min"] = cfg.radius_min;
  j["eps_direction"] = cfg.eps_direction;
  j["rho"] = cfg.rho;
  j["eta"] = cfg.eta;
  j["beta"] = cfg.beta;
  j["tau_max"] = cfg.tau_max;
  j["eps_repair"] = cfg.eps_repair;
  j["b0_scale"] = cfg.b0_scale;
  j["bfgs"] = sqp::to_string(cfg.bfgs);
  j["max_iterations"] = cfg.max_iterations;
  return j;
}

sqp::BfgsDenominator parse_bfgs(const std::string& s) {
  if (s == "paper") return sqp::BfgsDenominator::Paper;
  if (s == "conventional") return sqp::BfgsDenominator::Conventional;
  throw InputError("bfgs must be 'paper' or 'conventional', got '" + s + "'");
}

// Keys mirror the report's config echo.
void apply_config_file(const std::string& path, sqp::SqpConfig& cfg) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("config " + path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "radius") cfg.radius = it->get<double>();
      else if (k == "radius_min") cfg.radius_min = it->get<double>();
      else if (k == "eps_direction") cfg.eps_direction = it->get<double>();
      else if (k == "rho") cfg.rho = it->get<double>();
      else if (k == "eta") cfg.eta = it->get<double>();
      else if (k == "beta") cfg.beta = it->get<double>();
      else if (k == "tau_max") cfg.tau_max = it->get<int>();
      else if (k == "eps_repair") cfg.eps_repair = it->get<double>();
      else if (k == "b0_scale") cfg.b0_scale = it->get<double>();
      else if (k == "bfgs") cfg.bfgs = parse_bfgs(it->get<std::string>());
      else if (k == "max_iterations") cfg.max_iterations = it->get<int>();
      else throw InputError("config " + path + ": unknown key '" + k + "'");
    } catch (const json::exception& e) {
      throw InputError("config " + path + ": key '" + k + "': " + e.what());
    }
  }
}

std::vector<int> parse_id_list(const std::string& s, int m) {
  std::vector<int> ids;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    int id = -1;
    try {
      id = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || id < 0 || id >= m) {
      throw CLI::ValidationError("--scenario", "bad member id '" + tok + "'");
    }
    ids.push_back(id);
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust truss redundancy optimization"};
  app.require_subcommand(1);
  const auto start = std::chrono::steady_clock::now();

  Common c;
  int alpha = 0;
  double gamma = 0.0;
  bool all_scenarios = false;
  std::string scenario_csv_path, trace_path, design_out, config_path, out_path, scenario_ids;
  std::string bfgs_name;
  std::string h_c_text;
  double width = 800.0;
  bool no_fallback = false;
  sqp::SqpConfig flags;

  auto* analyze = app.add_subcommand("analyze", "Limit load factor of a design");
  add_common(analyze, c);

  auto* worst = app.add_subcommand("worst-case", "Worst case over alpha damaged members");
  add_common(worst, c);
  worst->add_option("--alpha", alpha, "Number of damaged members")->required()->check(CLI::NonNegativeNumber);
  worst->add_option("--gamma", gamma, "Residual area fraction of damaged members")
      ->check(CLI::Range(0.0, 1.0));
  worst->add_flag("--all-scenarios", all_scenarios, "Evaluate and report every scenario");
  worst->add_option("--scenario-csv", scenario_csv_path, "Write the scenario table as CSV");

  auto* optimize = app.add_subcommand("optimize", "Maximize the worst-case load factor");
  add_common(optimize, c);
  optimize->add_option("--alpha", alpha, "Number of damaged members")->required()->check(CLI::NonNegativeNumber);
  optimize->add_option("--gamma", gamma, "Residual area fraction of damaged members")
      ->check(CLI::Range(0.0, 1.0));
  optimize->add_option("--config", config_path, "JSON file with optimizer parameters");
  auto* o_radius = optimize->add_option("--radius", flags.radius, "Initial stencil radius");
  auto* o_rmin = optimize->add_option("--radius-min", flags.radius_min, "Minimum stencil radius");
  auto* o_eps = optimize->add_option("--eps", flags.eps_direction, "Direction norm tolerance");
  auto* o_rho = optimize->add_option("--rho", flags.rho, "Radius reduction factor");
  auto* o_eta = optimize->add_option("--eta", flags.eta, "Armijo constant");
  auto* o_beta = optimize->add_option("--beta", flags.beta, "Backtracking factor");
  auto* o_tau = optimize->add_option("--tau-max", flags.tau_max, "Maximum backtracking steps");
  auto* o_rep = optimize->add_option("--eps-repair", flags.eps_repair, "Repair floor for samples");
  auto* o_b0 = optimize->add_option("--b0-scale", flags.b0_scale, "Initial Hessian scale");
  auto* o_bfgs = optimize->add_option("--bfgs", bfgs_name, "BFGS denominator: paper or conventional");
  auto* o_iter = optimize->add_option("--max-iterations", flags.max_iterations, "Safety cap on iterations");
  optimize->add_flag("--no-fallback", no_fallback,
                     "Stop instead of continuing in conventional mode when the paper-mode update loses definiteness");
  optimize->add_option("--trace", trace_path, "Write the iteration trace CSV");
  optimize->add_option("--design-out", design_out, "Write the final design (instance schema)");

  auto* limit = app.add_subcommand("limit-design", "Plastic design without damage");
  add_common(limit, c, false);
  limit->add_option("--design-out", design_out, "Write the optimal design (instance schema)");

  auto* redundancy = app.add_subcommand("redundancy", "Strong redundancy for an allowance");
  add_common(redundancy, c);
  redundancy->add_option("--h-c", h_c_text, "Allowance on f = -lambda (number, or -inf)")->required();
  redundancy->add_option("--gamma", gamma, "Residual area fraction of damaged members")
      ->check(CLI::Range(0.0, 1.0));

  auto* render = app.add_subcommand("render", "Draw a design as SVG");
  add_common(render, c);
  render->add_option("--scenario", scenario_ids, "Comma-separated damaged member ids to omit");
  render->add_option("--width", width, "Image width in px")->check(CLI::PositiveNumber);
  render->add_option("--out", out_path, "SVG file (default stdout)");

  auto* export_ex = app.add_subcommand("export-example", "Write a built-in example as an instance file");
  std::string export_name;
  export_ex->add_option("--example", export_name, "I or II")->required();
  export_ex->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (export_ex->parsed()) {
      BuiltinExample which;
      try {
        which = parse_example_name(export_name);
      } catch (const std::exception& e) {
        throw CLI::ValidationError("--example", e.what());
      }
      const Instance inst = builtin_example(which);
      const std::string text = dump_instance(inst.structure, inst.design);
      if (out_path.empty()) std::cout << text;
      else write_file(out_path, text);
      return kExitOk;
    }

    apply_threads(c);
    const Loaded in = load(c);
    const GroundStructure& gs = in.inst.structure;
    const Design& design = in.inst.design;

    if (analyze->parsed()) {
      const LimitResult res = limit_load_factor(gs, design.areas);
      json r = report_header("analyze", in);
      r["status"] = to_string(res.status);
      r["lambda"] = num(res.lambda);
      r["areas"] = num_array(design.areas);
      if (res.status == LimitStatus::Optimal) r["forces"] = num_array(res.forces);
      finish(r, c, start);
      return status_exit(res.status);
    }

    if (worst->parsed() || optimize->parsed()) {
      if (alpha > gs.num_members()) {
        throw CLI::ValidationError("--alpha", "exceeds the number of members (" +
                                                  std::to_string(gs.num_members()) + ")");
      }
    }

    if (worst->parsed()) {
      WorstCaseOptions opts;
      opts.early_exit = !all_scenarios;
      const WorstCaseResult w = worst_case(gs, design.areas, alpha, gamma, opts);
      json r = report_header("worst-case", in);
      r["inputs"] = {{"alpha", alpha}, {"gamma", gamma}, {"all_scenarios", all_scenarios}};
      r["result"] = scenarios_json(w, all_scenarios);
      r["counters"] = {{"lp_solves", w.lp_solves}};
      if (!scenario_csv_path.empty()) write_file(scenario_csv_path, scenario_csv(w));
      finish(r, c, start);
      return lambda_exit(w.worst_lambda);
    }

    if (optimize->parsed()) {
      // Defaults < config file < flags.
      sqp::SqpConfig cfg;
      if (!config_path.empty()) apply_config_file(config_path, cfg);
      if (o_radius->count()) cfg.radius = flags.radius;
      if (o_rmin->count()) cfg.radius_min = flags.radius_min;
      if (o_eps->count()) cfg.eps_direction = flags.eps_direction;
      if (o_rho->count()) cfg.rho = flags.rho;
      if (o_eta->count()) cfg.eta = flags.eta;
      if (o_beta->count()) cfg.beta = flags.beta;
      if (o_tau->count()) cfg.tau_max = flags.tau_max;
      if (o_rep->count()) cfg.eps_repair = flags.eps_repair;
      if (o_b0->count()) cfg.b0_scale = flags.b0_scale;
      if (o_bfgs->count()) cfg.bfgs = parse_bfgs(bfgs_name);
      if (o_iter->count()) cfg.max_iterations = flags.max_iterations;
      try {
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("config", e.what());
      }

      sqp::RunResult res;
      try {
        res = no_fallback ? sqp::run(gs, alpha, gamma, design, cfg)
                          : sqp::run_with_fallback(gs, alpha, gamma, design, cfg);
      } catch (const sqp::InfeasibleStart& e) {
        std::cerr << "error: " << e.what() << " (alpha = " << alpha << ")\n";
        return kExitUnstableStart;
      }
      json r = report_header("optimize", in);
      r["inputs"] = {{"alpha", alpha}, {"gamma", gamma}, {"config", config_json(cfg)}};
      r["termination"] = sqp::to_string(res.run.termination);
      r["bfgs_used"] = sqp::to_string(res.bfgs_used);
      r["fell_back"] = res.fell_back;
      if (res.fell_back) r["fallback_iteration"] = res.run.stats.bfgs_switch_iteration;
      r["result"] = scenarios_json(res.worst, false);
      r["final_design"] = num_array(res.design.areas);
      r["volume"] = num(volume(res.design.areas, gs));
      r["counters"] = {{"iterations", res.run.iterations},
                       {"qp_solves", res.run.stats.qp_solves},
                       {"objective_evaluations", res.run.stats.objective_evaluations},
                       {"worst_case_evaluations", res.worst_case_evaluations},
                       {"lp_solves", res.lp_count},
                       {"line_search_failures", res.run.stats.line_search_failures},
                       {"stencil_failures", res.run.stats.stencil_failures},
                       {"bfgs_skips", res.run.stats.bfgs_skips}};
      r["final_radius"] = num(res.run.final_radius);
      if (!trace_path.empty()) write_file(trace_path, sqp::trace_csv(res.run.trace));
      if (!design_out.empty()) write_file(design_out, dump_instance(gs, res.design));
      finish(r, c, start);
      return kExitOk;
    }

    if (limit->parsed()) {
      const LimitDesign ld = classical_limit_design(gs, design.volume_budget);
      json r = report_header("limit-design", in);
      r["inputs"] = {{"volume_budget", num(design.volume_budget)}};
      r["lambda"] = num(ld.lambda);
      r["f"] = num(-ld.lambda);
      r["members_above_tolerance"] = count_members(ld.design.areas);
      r["vanishing_area"] = kVanishingArea;
      r["statically_determinate"] = ld.statically_determinate;
      r["final_design"] = num_array(ld.design.areas);
      r["forces"] = num_array(ld.forces);
      if (!design_out.empty()) write_file(design_out, dump_instance(gs, ld.design));
      finish(r, c, start);
      return kExitOk;
    }

    if (redundancy->parsed()) {
      char* end = nullptr;
      const double h_c = std::strtod(h_c_text.c_str(), &end);
      if (end == h_c_text.c_str() || *end != '\0' || std::isnan(h_c)) {
        throw CLI::ValidationError("--h-c", "not a number: " + h_c_text);
      }
      const RedundancyResult rr = strong_redundancy(gs, design.areas, h_c, gamma);
      json r = report_header("redundancy", in);
      r["inputs"] = {{"h_c", num(h_c)}, {"gamma", gamma}};
      r["nominal_violation"] = rr.nominal_violation;
      if (!rr.nominal_violation) r["alpha_hat"] = rr.alpha_hat;
      json fs = json::array();
      for (double f : rr.f_by_alpha) fs.push_back(num(f));
      r["f_by_alpha"] = fs;
      finish(r, c, start);
      return kExitOk;
    }

    if (render->parsed()) {
      RenderOptions opts;
      opts.width_px = width;
      if (!scenario_ids.empty()) {
        opts.scenario =
            DamageScenario::from_damaged(gs.num_members(), parse_id_list(scenario_ids, gs.num_members()), 0.0);
      }
      const std::string svg = render_svg(gs, design.areas, opts);
      if (out_path.empty()) std::cout << svg;
      else write_file(out_path, svg);
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
