#include "lowrankbp/combinat.hpp"
#include "lowrankbp/harness.hpp"
#include "lowrankbp/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace lowrankbp;

namespace {

enum Exit { kOk = 0, kConfig = 2, kRegime = 3, kInternal = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::TooLarge:
    case ErrorKind::NoValidQ:
    case ErrorKind::EmptyInput:
    case ErrorKind::OverlappingParts:
      return kConfig;
    case ErrorKind::ConsensusFailure:
    case ErrorKind::DegenerateSample:
      return kRegime;
    default:
      return kInternal;
  }
}

/// Stdout when `path` is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct Common {
  int d = 0;
  int k = 0;
  int s = 0;
  int n = 0;
  double b = 1.0;
  std::string adversary = "random-sign";
  double spike = 1e6;
  std::string subspace = "gaussian";
  long trials = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string json;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_n) {
  cmd->add_option("--d", c.d, "Ambient dimension")->capture_default_str();
  cmd->add_option("--k", c.k, "Subspace dimension")->capture_default_str();
  cmd->add_option("--s", c.s, "Corrupted coordinates per point")->capture_default_str();
  if (with_n) cmd->add_option("--n", c.n, "Samples per trial")->capture_default_str();
  cmd->add_option("--B", c.b, "Coordinate scale of the data and bounded adversaries")->capture_default_str();
  cmd->add_option("--adversary", c.adversary, "zero-out|random-sign|worst-case-1d|large-spike")->capture_default_str();
  cmd->add_option("--spike", c.spike, "Magnitude of large-spike corruptions")->capture_default_str();
  cmd->add_option("--subspace", c.subspace, "gaussian|axis")->capture_default_str();
  cmd->add_option("--trials", c.trials, "Number of trials")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Base seed; trial i uses seed ^ i")->capture_default_str();
  cmd->add_option("--out", c.out, "CSV output path (default stdout)");
  cmd->add_option("--json", c.json, "JSON summary path");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores, capped by LOWRANKBP_THREADS)");
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  long count = 0;
  for (double x : xs) {
    if (!std::isnan(x)) {
      sum += x;
      ++count;
    }
  }
  return count ? sum / count : harness::kNaN;
}

io::Json number_or_null(double x) { return std::isnan(x) ? io::Json(nullptr) : io::Json(x); }

void write_json(const std::string& path, const io::Json& doc) {
  if (path.empty()) return;
  Output out(path);
  out.stream() << std::setw(2) << doc << '\n';
}

int run_bp_tail(const Common& c, const std::vector<double>& grid, const std::string& errors_out) {
  harness::TailConfig cfg;
  cfg.d = c.d;
  cfg.k = c.k;
  cfg.s = c.s;
  cfg.b = c.b;
  cfg.adversary = gen::parse_adversary_kind(c.adversary);
  cfg.spike = c.spike;
  cfg.subspace = harness::parse_subspace_kind(c.subspace);
  cfg.trials = c.trials;
  cfg.seed = c.seed;
  cfg.t_grid = grid;
  cfg.threads = c.threads;
  const auto result = harness::run_bp_tail(cfg);

  Output out(c.out);
  io::CsvWriter csv(out.stream(), {"t", "trials", "exceed_count", "empirical_p", "wilson_lo", "wilson_hi",
                                   "bound_factorial", "bound_uniform", "bound_geometric", "bound_min"});
  io::Json rows = io::Json::array();
  for (const auto& r : result.rows) {
    csv.row(r.t, r.trials, r.exceed_count, r.empirical_p, r.wilson.lo, r.wilson.hi, r.bound_factorial,
            r.bound_uniform, r.bound_geometric, r.bound_min);
    rows.push_back({{"t", r.t},
                    {"exceed_count", r.exceed_count},
                    {"empirical_p", r.empirical_p},
                    {"wilson_lo", r.wilson.lo},
                    {"wilson_hi", r.wilson.hi},
                    {"bound_min", number_or_null(r.bound_min)}});
  }
  if (!errors_out.empty()) {
    Output eo(errors_out);
    io::CsvWriter ecsv(eo.stream(), {"trial", "seed", "l1_error"});
    for (std::size_t i = 0; i < result.errors.size(); ++i) ecsv.row(i, trial_seed(c.seed, i), result.errors[i]);
  }
  write_json(c.json, {{"command", "bp-tail"},
                      {"d", c.d},
                      {"k", c.k},
                      {"s", c.s},
                      {"B", c.b},
                      {"adversary", c.adversary},
                      {"subspace", c.subspace},
                      {"trials", c.trials},
                      {"seed", c.seed},
                      {"mean_error", mean_of(result.errors)},
                      {"rows", rows}});
  return kOk;
}

harness::PipelineTrialConfig pipeline_config(const Common& c, double mean_offset, double c0, double clip_mult,
                                             bool oracle) {
  harness::PipelineTrialConfig cfg;
  cfg.d = c.d;
  cfg.k = c.k;
  cfg.s = c.s;
  cfg.n = c.n;
  cfg.b = c.b;
  cfg.adversary = gen::parse_adversary_kind(c.adversary);
  cfg.spike = c.spike;
  cfg.subspace = harness::parse_subspace_kind(c.subspace);
  cfg.mean_offset = mean_offset;
  cfg.trials = c.trials;
  cfg.seed = c.seed;
  cfg.oracle_subspace = oracle;
  cfg.pipeline.subrec.c0 = c0;
  cfg.pipeline.truncation_radius_multiplier = clip_mult;
  cfg.threads = c.threads;
  return cfg;
}

int run_pipeline(const Common& c, double mean_offset, double c0, double clip_mult, bool oracle, bool subspace_only,
                 const std::string& save_instance) {
  const auto cfg = pipeline_config(c, mean_offset, c0, clip_mult, oracle);
  cfg.validate();
  if (!save_instance.empty()) io::save_instance(save_instance, harness::pipeline_instance(cfg, trial_seed(c.seed, 0)));
  const auto records = harness::run_pipeline_trials(cfg, subspace_only);

  Output out(c.out);
  long ok = 0;
  long failures = 0;
  std::vector<double> mean_err, max_err, mu_err;
  if (subspace_only) {
    io::CsvWriter csv(out.stream(), {"trial", "seed", "status", "subspace_distance", "subspace_ok", "micros"});
    for (const auto& r : records) csv.row(r.trial, r.seed, r.status, r.subspace_distance, int(r.subspace_ok), r.micros);
  } else {
    io::CsvWriter csv(out.stream(), {"trial", "seed", "status", "subspace_distance", "subspace_ok", "mean_error",
                                     "median_error", "max_error", "mean_l1_error", "clipped_entries", "micros"});
    for (const auto& r : records) {
      csv.row(r.trial, r.seed, r.status, r.subspace_distance, int(r.subspace_ok), r.mean_error, r.median_error,
              r.max_error, r.mean_l1_error, r.clipped_entries, r.micros);
    }
  }
  for (const auto& r : records) {
    ok += r.subspace_ok;
    failures += r.status != "ok";
    mean_err.push_back(r.mean_error);
    max_err.push_back(r.max_error);
    mu_err.push_back(r.mean_l1_error);
  }
  double worst = harness::kNaN;
  for (double x : max_err) {
    if (!std::isnan(x)) worst = std::isnan(worst) ? x : std::max(worst, x);
  }
  io::Json summary = {{"command", subspace_only ? "subspace" : "pipeline"},
                      {"d", c.d},
                      {"k", c.k},
                      {"s", c.s},
                      {"n", c.n},
                      {"B", c.b},
                      {"adversary", c.adversary},
                      {"subspace", c.subspace},
                      {"mean_offset", mean_offset},
                      {"trials", c.trials},
                      {"seed", c.seed},
                      {"subspace_success", static_cast<double>(ok) / static_cast<double>(records.size())},
                      {"regime_failures", failures}};
  if (!subspace_only) {
    summary["mean_error"] = number_or_null(mean_of(mean_err));
    summary["max_error"] = number_or_null(worst);
    summary["mean_l1_error"] = number_or_null(mean_of(mu_err));
  }
  write_json(c.json, summary);
  return failures > 0 ? kRegime : kOk;
}

int run_replay(const std::string& instance_path, const std::string& report_path, double clip_mult, double c0) {
  const auto inst = io::load_instance(instance_path);
  pipeline::PipelineConfig pc;
  pc.truncation_radius_multiplier = clip_mult;
  pc.subrec.c0 = c0;
  const pipeline::GroundTruth truth{inst.clean, inst.model.mean()};
  const auto report = pipeline::recover_dataset(inst.corrupted, pc, inst.model.coord_bound(), &truth);
  if (!report_path.empty()) io::save_report(report_path, report);
  std::cout << std::setprecision(17) << "mean_error=" << report.per_point_l1->mean()
            << " mean_l1_error=" << *report.mean_l1_error << '\n';
  return kOk;
}

std::vector<IndexSet> parse_sets(const std::string& text, int universe) {
  std::vector<std::vector<int>> raw;
  std::istringstream lines(text);
  std::string chunk;
  int top = universe;
  while (std::getline(lines, chunk, ';')) {
    std::istringstream in(chunk);
    std::vector<int> e;
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t used = 0;
        e.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "bad element '" + tok + "'");
      }
      top = std::max(top, e.back());
    }
    if (!e.empty()) raw.push_back(std::move(e));
  }
  std::vector<IndexSet> sets;
  for (auto& e : raw) {
    try {
      sets.emplace_back(top, std::move(e));
    } catch (const Error& err) {
      throw Error(ErrorKind::ParseError, err.what());
    }
  }
  return sets;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Basis pursuit under coordinate corruption: experiments and combinatorial checks"};
  app.set_config("--config", "", "INI/TOML file; sections are subcommand names, flags override it");
  app.require_subcommand(1);

  Common tail;
  tail.d = 600;
  tail.k = 2;
  tail.s = 3;
  tail.trials = 1000;
  std::vector<double> grid{0.01, 1.0, 4.0, 8.0};
  std::string errors_out;
  auto* bp_tail = app.add_subcommand("bp-tail", "Empirical P(error >= t) of basis pursuit vs the tail bounds");
  add_common(bp_tail, tail, false);
  bp_tail->add_option("--t-grid", grid, "Comma-separated thresholds")->delimiter(',')->capture_default_str();
  bp_tail->add_option("--errors-out", errors_out, "Per-trial error CSV");

  Common pipe;
  pipe.d = 60;
  pipe.k = 3;
  pipe.s = 2;
  pipe.n = 2000;
  pipe.trials = 20;
  double mean_offset = 0.0;
  double c0 = 0.05;
  double clip_mult = 3.0;
  bool oracle = false;
  std::string save_instance;
  std::string from_instance;
  std::string report_out;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Subspace recovery, clipping and per-point basis pursuit");
  add_common(pipeline_cmd, pipe, true);
  pipeline_cmd->add_option("--mean-offset", mean_offset, "||mu||_inf of a Gaussian-direction mean")->capture_default_str();
  pipeline_cmd->add_option("--c0", c0, "Regime constant of subspace recovery")->capture_default_str();
  pipeline_cmd->add_option("--clip-mult", clip_mult, "Clipping radius multiplier")->capture_default_str();
  pipeline_cmd->add_flag("--oracle-subspace", oracle, "Use the true subspace instead of recovering it");
  pipeline_cmd->add_option("--save-instance", save_instance, "Write trial 0's instance as JSON plus .bin sidecar");
  pipeline_cmd->add_option("--from-instance", from_instance, "Run once on a saved instance instead of sampling");
  pipeline_cmd->add_option("--report-out", report_out, "With --from-instance: write the report as JSON plus .bin");

  Common sub = pipe;
  double sub_offset = 0.0;
  double sub_c0 = 0.05;
  auto* subspace_cmd = app.add_subcommand("subspace", "Subspace recovery only");
  add_common(subspace_cmd, sub, true);
  subspace_cmd->add_option("--mean-offset", sub_offset, "||mu||_inf of a Gaussian-direction mean")->capture_default_str();
  subspace_cmd->add_option("--c0", sub_c0, "Regime constant of subspace recovery")->capture_default_str();

  auto* comb = app.add_subcommand("combinat", "Packings, the family-size conjecture and Hall matchings");
  comb->require_subcommand(1);
  int pd = 64, ps = 8, pdelta = 2;
  unsigned pq = 0;
  std::string family_out;
  auto* packing = comb->add_subcommand("verify-packing", "Build the polynomial packing and verify it");
  packing->add_option("--d", pd)->capture_default_str();
  packing->add_option("--s", ps)->capture_default_str();
  packing->add_option("--delta", pdelta)->capture_default_str();
  packing->add_option("--q", pq, "Field order (default: largest admissible)");
  packing->add_option("--out", family_out, "Write the family in 'd s count' format");

  int cd = 4, cs = 2, ck = 2, ct = 1;
  bool distinct = false;
  long budget = 50'000'000;
  auto* conj = comb->add_subcommand("conjecture", "Exhaustive maximum family vs max |F_i|");
  conj->add_option("--d", cd)->capture_default_str();
  conj->add_option("--s", cs)->capture_default_str();
  conj->add_option("--k", ck)->capture_default_str();
  conj->add_option("--t", ct)->capture_default_str();
  conj->add_flag("--distinct", distinct, "Forbid only k distinct members (default allows repeats)");
  conj->add_option("--node-budget", budget)->capture_default_str();

  std::string sets_text, sets_file;
  int msize = 1, mud = 0;
  auto* matching = comb->add_subcommand("matching", "Decide a perfect s-matching");
  matching->add_option("--sets", sets_text, "Sets separated by ';', elements by spaces, e.g. \"1 2;1 2\"");
  matching->add_option("--in", sets_file, "File with one set per line");
  matching->add_option("--size", msize, "Elements to pick from each set")->capture_default_str();
  matching->add_option("--universe", mud, "Universe size (default: largest element)");

  int bd = 600, bk = 2, bs = 3;
  double bb = 1.0;
  std::vector<double> bgrid{0.01, 1.0, 4.0, 8.0};
  std::string bout;
  auto* bounds = app.add_subcommand("bounds", "Tail bounds and the expected-error bound");
  bounds->add_option("--d", bd)->capture_default_str();
  bounds->add_option("--k", bk)->capture_default_str();
  bounds->add_option("--s", bs)->capture_default_str();
  bounds->add_option("--B", bb)->capture_default_str();
  bounds->add_option("--t-grid", bgrid)->delimiter(',')->capture_default_str();
  bounds->add_option("--out", bout);
  bool expected_only = false;
  bounds->add_flag("--expected", expected_only, "Print the expected-error bound and its threshold instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*bp_tail) return run_bp_tail(tail, grid, errors_out);
    if (*pipeline_cmd) {
      if (!from_instance.empty()) return run_replay(from_instance, report_out, clip_mult, c0);
      return run_pipeline(pipe, mean_offset, c0, clip_mult, oracle, false, save_instance);
    }
    if (*subspace_cmd) return run_pipeline(sub, sub_offset, sub_c0, 3.0, false, true, "");
    if (*packing) {
      const auto family = combinat::build_packing(pd, ps, pdelta, pq ? std::optional<std::uint32_t>(pq) : std::nullopt);
      const bool ok = combinat::verify_packing(family, pdelta);
      if (!family_out.empty()) {
        Output out(family_out);
        combinat::write_family(out.stream(), family);
      }
      std::cout << (ok ? "OK" : "FAIL") << " size=" << family.size() << '\n';
      return ok ? kOk : kInternal;
    }
    if (*conj) {
      combinat::ExtremalOptions opts;
      opts.multiplicity = distinct ? combinat::Multiplicity::Distinct : combinat::Multiplicity::WithRepetition;
      opts.node_budget = budget;
      const auto res = combinat::max_family_no_matchable(cd, cs, ck, ct, opts);
      const auto fb = combinat::conjectured_family_bounds(cd, cs, ck, ct);
      std::cout << "exact=" << res.size << (res.completed ? "" : "+") << " max_Fi=" << fb.exact_max_fi
                << " closed_form=" << fb.closed_form << " match=" << (res.completed && res.size == fb.exact_max_fi ? "true" : "false")
                << " nodes=" << res.nodes << '\n';
      return kOk;
    }
    if (*matching) {
      std::string text = sets_text;
      if (!sets_file.empty()) {
        std::ifstream in(sets_file);
        if (!in) throw Error(ErrorKind::ParseError, "cannot open " + sets_file);
        std::string line;
        while (std::getline(in, line)) text += ";" + line;
      }
      const auto sets = parse_sets(text, mud);
      if (sets.empty()) throw Error(ErrorKind::ParseError, "no sets given");
      const auto res = combinat::has_perfect_matching(sets, msize);
      std::cout << (res.perfect ? "true" : "false") << '\n';
      for (const auto& t : res.witness) {
        for (std::size_t i = 0; i < t.size(); ++i) std::cout << (i ? " " : "") << t[i];
        std::cout << '\n';
      }
      return kOk;
    }
    if (*bounds) {
      if (expected_only) {
        std::cout << "expected_error_bound=" << bp::expected_error_bound(bk, bs, bd, bb)
                  << " t0=" << bp::expected_error_threshold(bk, bs, bd) << '\n';
        return kOk;
      }
      Output out(bout);
      io::CsvWriter csv(out.stream(), {"t", "bound_factorial", "bound_uniform", "bound_geometric", "bound_min"});
      for (double t : bgrid) {
        const auto b = bp::theorem1_bounds(bk, bs, bd, t);
        const double geo = b.bound_geometric.value_or(harness::kNaN);
        double lo = std::min(b.bound_factorial, b.bound_uniform);
        if (b.bound_geometric) lo = std::min(lo, *b.bound_geometric);
        csv.row(t, b.bound_factorial, b.bound_uniform, geo, lo);
      }
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kConfig;
}
