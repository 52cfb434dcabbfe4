#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpca/cauchy_pca.hpp"
#include "cpca/csv.hpp"
#include "cpca/influence.hpp"
#include "cpca/linalg.hpp"
#include "cpca/rng.hpp"
#include "cpca/robust_prep.hpp"
#include "cpca/sim.hpp"
#include "cpca/types.hpp"

namespace {

using namespace cpca;

constexpr int kExitUsage = 2;       // bad flags, malformed input, failed validation
constexpr int kExitNumeric = 3;     // a numeric routine gave up
constexpr int kExitRepFailure = 4;  // simulate: more than 10% of replicates failed

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    auto begin = item.find_first_not_of(" \t");
    auto end = item.find_last_not_of(" \t");
    parts.push_back(begin == std::string::npos ? "" : item.substr(begin, end - begin + 1));
  }
  if (!text.empty() && text.back() == ',') parts.push_back("");
  return parts;
}

double parse_double_token(const std::string& token, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed " + what + ": \"" + token + "\"");
  }
}

long long parse_int_token(const std::string& token, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed " + what + ": \"" + token + "\"");
  }
}

std::uint64_t parse_seed_token(const std::string& token, const std::string& what) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed " + what + ": \"" + token + "\"");
  }
}

bool parse_bool_token(const std::string& token, const std::string& what) {
  if (token == "1" || token == "true") return true;
  if (token == "0" || token == "false") return false;
  throw std::invalid_argument(what + " must be one of 1, 0, true, false");
}

CenterMode parse_center(const std::string& name) {
  if (name == "column") return CenterMode::kColumnMedian;
  if (name == "spatial") return CenterMode::kSpatialMedian;
  if (name == "none") return CenterMode::kNone;
  throw std::invalid_argument("center must be one of column, spatial, none");
}

ScaleMode parse_scale(const std::string& name) {
  if (name == "mad") return ScaleMode::kMadAboutMedian;
  if (name == "none") return ScaleMode::kNone;
  throw std::invalid_argument("scale must be one of mad, none");
}

Vector parse_vector_text(const std::string& text, const std::string& what) {
  std::vector<std::string> parts = split_list(text);
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_double_token(parts[i], what);
  }
  return v;
}

// %.6g rendering for the human-facing aligned tables; the CSV artifacts use
// the 17-digit round-trip form instead.
std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      if (i + 1 < row.size()) out.append(width[i] - row[i].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

// --threads beats CPCA_THREADS beats the logical core count.
int resolve_threads(bool flag_given, int flag_value) {
  if (flag_given) {
    if (flag_value < 1) throw std::invalid_argument("threads must be positive");
    return flag_value;
  }
  if (const char* env = std::getenv("CPCA_THREADS")) {
    long long v = parse_int_token(env, "CPCA_THREADS");
    if (v < 1) throw std::invalid_argument("CPCA_THREADS must be positive");
    return static_cast<int>(v);
  }
  unsigned cores = std::thread::hardware_concurrency();
  return cores > 0 ? static_cast<int>(cores) : 1;
}

struct FitOptions {
  std::string input;
  std::string out;
  int components = 1;
  std::string center = "column";
  std::string scale = "mad";
  double tol = 1e-6;
  int max_iters = 500;
  std::string init = "classical";
  std::uint64_t seed = 0;
};

int run_fit(const FitOptions& o) {
  CsvTable table = read_csv(o.input);
  DataMatrix data = DataMatrix::validated(table.values);
  CenteringSpec spec{parse_center(o.center), parse_scale(o.scale)};
  PrepResult prep = prepare(data, spec);

  CauchyPcaConfig cfg;
  cfg.k = o.components;
  cfg.outer_tol = o.tol;
  cfg.max_outer_iters = o.max_iters;
  if (o.init == "classical") {
    cfg.init_mode = InitMode::kClassicalPc;
  } else if (o.init == "random") {
    cfg.init_mode = InitMode::kRandom;
  } else {
    throw std::invalid_argument("init must be one of classical, random");
  }
  cfg.seed = o.seed;

  CauchyPcaResult res = fit_cauchy_pca(DataMatrix::validated(prep.prepped), cfg);

  Matrix dirs(cfg.k, data.p());
  Matrix params(cfg.k, 4);
  for (int i = 0; i < cfg.k; ++i) {
    dirs.row(i) = res.directions[static_cast<std::size_t>(i)].coords().transpose();
    params(i, 0) = res.params[static_cast<std::size_t>(i)].mu;
    params(i, 1) = res.params[static_cast<std::size_t>(i)].sigma;
    params(i, 2) = res.iterations[static_cast<std::size_t>(i)];
    params(i, 3) = res.converged[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  write_text_file(o.out + ".directions.csv", matrix_to_csv(dirs));
  write_text_file(o.out + ".params.csv",
                  matrix_to_csv(params, {"mu", "sigma", "iterations", "converged"}));

  nlohmann::json meta;
  meta["n"] = data.n();
  meta["p"] = data.p();
  meta["components"] = cfg.k;
  meta["center"] = o.center;
  meta["scale"] = o.scale;
  meta["outer_tol_degrees"] = cfg.outer_tol;
  meta["max_outer_iters"] = cfg.max_outer_iters;
  meta["init"] = o.init;
  meta["seed"] = cfg.seed;
  meta["version"] = kVersion;
  write_text_file(o.out + ".meta.json", meta.dump(2) + "\n");

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"component", "mu", "sigma", "iterations", "converged"});
  for (int i = 0; i < cfg.k; ++i) {
    rows.push_back({std::to_string(i + 1), fmt6(params(i, 0)), fmt6(params(i, 1)),
                    std::to_string(res.iterations[static_cast<std::size_t>(i)]),
                    res.converged[static_cast<std::size_t>(i)] ? "yes" : "no"});
  }
  std::cout << "n " << data.n() << "  p " << data.p() << "  center " << o.center
            << "  scale " << o.scale << "\n"
            << aligned_table(rows) << "wrote " << o.out << ".directions.csv, " << o.out
            << ".params.csv, " << o.out << ".meta.json\n";
  return 0;
}

struct SimulateOptions {
  std::string config;
  std::string out;
  std::string kappa_text = "none";
  bool kappa_given = false;
  int n = 0, p = 0, reps = 0;
  bool n_given = false, p_given = false, reps_given = false;
  double phi = 0, contamination = 0, shift = 0, eigen_rate = 0;
  bool phi_given = false, contamination_given = false, shift_given = false,
       eigen_rate_given = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string center, scale;
  bool iid_dirs = false;
  bool iid_dirs_given = false;
  int threads = 0;
  bool threads_given = false;
  bool measure_runtime = false;
};

struct KappaPoint {
  std::string label;
  std::optional<double> value;
};

std::vector<KappaPoint> parse_kappa_grid(const std::string& text) {
  std::vector<KappaPoint> grid;
  for (const std::string& token : split_list(text)) {
    if (token == "none") {
      grid.push_back({"none", std::nullopt});
    } else {
      double v = parse_double_token(token, "kappa");
      grid.push_back({format_double(v), v});
    }
  }
  if (grid.empty()) throw std::invalid_argument("kappa list is empty");
  return grid;
}

int run_simulate(const SimulateOptions& o) {
  std::map<std::string, std::string> cfg;
  if (!o.config.empty()) cfg = parse_config_file(o.config);
  auto take = [&cfg](const char* key) -> std::optional<std::string> {
    auto it = cfg.find(key);
    if (it == cfg.end()) return std::nullopt;
    std::string v = it->second;
    cfg.erase(it);
    return v;
  };

  SimScenario s;
  std::string kappa_text = "none";
  if (auto v = take("n")) s.n = static_cast<int>(parse_int_token(*v, "n"));
  if (auto v = take("p")) s.p = static_cast<int>(parse_int_token(*v, "p"));
  if (auto v = take("kappa")) kappa_text = *v;
  if (auto v = take("phi")) s.phi_degrees = parse_double_token(*v, "phi");
  if (auto v = take("reps")) s.reps = static_cast<int>(parse_int_token(*v, "reps"));
  if (auto v = take("seed")) s.seed = parse_seed_token(*v, "seed");
  if (auto v = take("contamination")) s.contamination = parse_double_token(*v, "contamination");
  if (auto v = take("shift")) s.shift = parse_double_token(*v, "shift");
  if (auto v = take("eigen_rate")) s.eigen_rate = parse_double_token(*v, "eigen_rate");
  if (auto v = take("center")) s.centering.mode = parse_center(*v);
  if (auto v = take("scale")) s.centering.scale = parse_scale(*v);
  if (auto v = take("iid_outlier_dirs")) s.iid_outlier_dirs = parse_bool_token(*v, "iid_outlier_dirs");
  if (!cfg.empty()) throw std::invalid_argument("unknown config key: " + cfg.begin()->first);

  if (o.n_given) s.n = o.n;
  if (o.p_given) s.p = o.p;
  if (o.kappa_given) kappa_text = o.kappa_text;
  if (o.phi_given) s.phi_degrees = o.phi;
  if (o.reps_given) s.reps = o.reps;
  if (o.seed_given) s.seed = o.seed;
  if (o.contamination_given) s.contamination = o.contamination;
  if (o.shift_given) s.shift = o.shift;
  if (o.eigen_rate_given) s.eigen_rate = o.eigen_rate;
  if (!o.center.empty()) s.centering.mode = parse_center(o.center);
  if (!o.scale.empty()) s.centering.scale = parse_scale(o.scale);
  if (o.iid_dirs_given) s.iid_outlier_dirs = o.iid_dirs;

  std::vector<KappaPoint> grid = parse_kappa_grid(kappa_text);
  int threads = resolve_threads(o.threads_given, o.threads);

  std::vector<ScenarioRow> results;
  for (const KappaPoint& kp : grid) {
    s.kappa = kp.value;
    s.validate();
    results.push_back(run_scenario(s, threads));
  }

  const char* methods[] = {"cauchy", "pp", "classical"};
  auto angle_of = [](const ScenarioRow& r, int m) {
    return m == 0 ? r.mean_angle_cauchy : m == 1 ? r.mean_angle_pp : r.mean_angle_classical;
  };
  auto runtime_of = [](const ScenarioRow& r, int m) {
    return m == 0 ? r.mean_runtime_cauchy : m == 1 ? r.mean_runtime_pp : r.mean_runtime_classical;
  };

  // The runtime column defaults to 0 so a fixed seed yields byte-identical
  // output; --measure-runtime fills in wall-clock means at the cost of
  // reproducible bytes.
  std::string csv = "phi,method,k,mean_angle_deg,mean_runtime_s,reps_used\n";
  std::vector<std::vector<std::string>> table;
  table.push_back({"phi", "method", "k", "mean_angle_deg", "mean_runtime_s", "reps_used"});
  for (int m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const ScenarioRow& r = results[i];
      double runtime = o.measure_runtime ? runtime_of(r, m) : 0.0;
      csv += format_double(s.phi_degrees);
      csv += ",";
      csv += methods[m];
      csv += ",";
      csv += grid[i].label;
      csv += ",";
      csv += format_double(angle_of(r, m));
      csv += ",";
      csv += format_double(runtime);
      csv += ",";
      csv += std::to_string(r.reps_used);
      csv += "\n";
      table.push_back({fmt6(s.phi_degrees), methods[m], grid[i].label, fmt6(angle_of(r, m)),
                       o.measure_runtime ? fmt6(runtime) : std::string("-"),
                       std::to_string(r.reps_used)});
    }
  }

  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(o.out, csv);
    std::cout << aligned_table(table) << "wrote " << o.out << "\n";
  }
  return 0;
}

struct InfluenceOptions {
  std::string input;
  std::string out;
  std::string estimator = "cauchy";
  std::string z_text;
  bool z_given = false;
  std::string z_mode;
  std::string alphas_text = "1";
  std::uint64_t seed = 0;
  bool validate = false;
  double eps = 0.02;
};

int run_influence(const InfluenceOptions& o) {
  CsvTable table = read_csv(o.input);
  DataMatrix data = DataMatrix::validated(table.values);
  Eigen::Index p = data.p();

  Vector z;
  if (o.z_given) {
    z = parse_vector_text(o.z_text, "z entry");
    if (z.size() != p) {
      throw std::invalid_argument("z has " + std::to_string(z.size()) +
                                  " entries, data has p = " + std::to_string(p));
    }
    if (!z.allFinite()) throw std::invalid_argument("z has non-finite entries");
  } else if (o.z_mode == "sweep") {
    RngStream stream(o.seed);
    z = stream.normal_vector(p);
    z.normalize();
  } else {
    throw std::invalid_argument("provide --z or --z-mode sweep");
  }

  std::vector<double> alphas;
  for (const std::string& token : split_list(o.alphas_text)) {
    alphas.push_back(parse_double_token(token, "alpha"));
  }
  if (alphas.empty()) throw std::invalid_argument("alpha list is empty");

  bool classical = o.estimator == "classical";
  if (!classical && o.estimator != "cauchy") {
    throw std::invalid_argument("estimator must be one of classical, cauchy");
  }

  CovarianceModel model{Matrix(), Vector()};
  CauchyDirectionFit fit{Vector(), CauchyParams{}};
  if (classical) {
    auto [sigma, mu] = sample_covariance(data.values);
    model = CovarianceModel::validated(std::move(sigma), std::move(mu));
  } else {
    fit = tight_cauchy_direction_fit(data);
  }

  std::string csv = classical ? "alpha,if_norm" : "alpha,if_norm,b_norm,singular";
  if (o.validate) csv += ",rel_gap";
  csv += "\n";
  std::vector<std::vector<std::string>> text;
  text.push_back(split_list(csv.substr(0, csv.size() - 1)));

  for (double alpha : alphas) {
    Vector za = alpha * z;
    Vector analytic;
    double if_norm = std::numeric_limits<double>::quiet_NaN();
    double b_norm = 0.0;
    std::string singular = "none";
    if (classical) {
      analytic = classical_if(za, model).if_vector;
      if_norm = analytic.norm();
    } else {
      CauchyIfResult r = cauchy_if(za, data, fit.u_hat, fit.params);
      b_norm = r.b_vector.norm();
      if (r.singular_a) {
        singular = r.singular_fisher ? "SINGULAR_A+SINGULAR_FISHER" : "SINGULAR_A";
      } else {
        analytic = r.if_vector;
        if_norm = analytic.norm();
        if (r.singular_fisher) singular = "SINGULAR_FISHER";
      }
    }

    csv += format_double(alpha);
    csv += "," + format_double(if_norm);
    std::vector<std::string> row{fmt6(alpha), fmt6(if_norm)};
    if (!classical) {
      csv += "," + format_double(b_norm);
      csv += "," + singular;
      row.push_back(fmt6(b_norm));
      row.push_back(singular);
    }
    if (o.validate) {
      Vector emp = empirical_if_richardson(za, data,
                                           classical ? IfEstimator::kClassical
                                                     : IfEstimator::kCauchy,
                                           o.eps);
      double gap = std::numeric_limits<double>::quiet_NaN();
      if (analytic.size() == emp.size()) {
        gap = (analytic - emp).norm() / std::max(emp.norm(), 1e-12);
      }
      csv += "," + format_double(gap);
      row.push_back(fmt6(gap));
    }
    csv += "\n";
    text.push_back(row);
  }

  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(o.out, csv);
    std::cout << aligned_table(text) << "wrote " << o.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust principal component analysis with a Cauchy profile likelihood"};
  app.set_version_flag("--version", std::string("cpca ") + kVersion);
  app.require_subcommand(1);

  FitOptions fo;
  CLI::App* fit = app.add_subcommand("fit", "Fit robust principal components to a CSV matrix");
  fit->add_option("input", fo.input, "CSV file, rows = observations")->required();
  fit->add_option("--components,-k", fo.components, "number of components")->capture_default_str();
  fit->add_option("--center", fo.center, "column | spatial | none")->capture_default_str()
      ->check(CLI::IsMember({"column", "spatial", "none"}));
  fit->add_option("--scale", fo.scale, "mad | none")->capture_default_str()
      ->check(CLI::IsMember({"mad", "none"}));
  fit->add_option("--out", fo.out, "output path prefix")->required();
  fit->add_option("--tol", fo.tol, "outer angle tolerance, degrees")->capture_default_str();
  fit->add_option("--max-iters", fo.max_iters, "outer iteration cap")->capture_default_str();
  fit->add_option("--init", fo.init, "classical | random")->capture_default_str()
      ->check(CLI::IsMember({"classical", "random"}));
  fit->add_option("--seed", fo.seed, "seed for random init")->capture_default_str();

  SimulateOptions so;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo angle-error comparison");
  sim->add_option("--config", so.config, "flat key = value scenario file");
  CLI::Option* so_n = sim->add_option("--n", so.n, "sample size");
  CLI::Option* so_p = sim->add_option("--p", so.p, "dimension");
  CLI::Option* so_kappa = sim->add_option("--kappa", so.kappa_text,
                                          "comma list of outlier log-norms; none = no outliers");
  CLI::Option* so_phi = sim->add_option("--phi", so.phi, "outlier angle to the clean PC, degrees");
  CLI::Option* so_reps = sim->add_option("--reps", so.reps, "replicates per kappa");
  CLI::Option* so_seed = sim->add_option("--seed", so.seed, "base seed");
  CLI::Option* so_cont = sim->add_option("--contamination", so.contamination, "outlier fraction");
  CLI::Option* so_shift = sim->add_option("--shift", so.shift, "mean shift of the clean draw");
  CLI::Option* so_rate = sim->add_option("--eigen-rate", so.eigen_rate,
                                         "rate of the eigenvalue distribution");
  sim->add_option("--center", so.center, "column | spatial | none")
      ->check(CLI::IsMember({"column", "spatial", "none"}));
  sim->add_option("--scale", so.scale, "mad | none")->check(CLI::IsMember({"mad", "none"}));
  CLI::Option* so_iid = sim->add_flag("--iid-outlier-dirs", so.iid_dirs,
                                      "draw a fresh outlier direction per outlier");
  CLI::Option* so_threads = sim->add_option("--threads", so.threads,
                                            "worker pool size (default: logical cores, or CPCA_THREADS)");
  sim->add_flag("--measure-runtime", so.measure_runtime,
                "report wall-clock means instead of 0 (output no longer byte-reproducible)");
  sim->add_option("--out", so.out, "write the CSV here instead of stdout");

  InfluenceOptions io;
  CLI::App* infl = app.add_subcommand("influence", "Influence of a point mass on the first PC");
  infl->add_option("input", io.input, "CSV file, rows = observations")->required();
  infl->add_option("--estimator", io.estimator, "classical | cauchy")->capture_default_str()
      ->check(CLI::IsMember({"classical", "cauchy"}));
  CLI::Option* io_z = infl->add_option("--z", io.z_text, "comma list: the contamination point");
  infl->add_option("--z-mode", io.z_mode, "sweep = seeded random unit z")
      ->check(CLI::IsMember({"sweep"}));
  infl->add_option("--alphas", io.alphas_text, "comma list of scalings of z")->capture_default_str();
  infl->add_option("--seed", io.seed, "seed for --z-mode sweep")->capture_default_str();
  infl->add_flag("--validate", io.validate,
                 "add the relative gap to the finite-epsilon influence");
  infl->add_option("--eps", io.eps, "contamination weight for --validate")->capture_default_str();
  infl->add_option("--out", io.out, "write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);

    so.n_given = so_n->count() > 0;
    so.p_given = so_p->count() > 0;
    so.kappa_given = so_kappa->count() > 0;
    so.phi_given = so_phi->count() > 0;
    so.reps_given = so_reps->count() > 0;
    so.seed_given = so_seed->count() > 0;
    so.contamination_given = so_cont->count() > 0;
    so.shift_given = so_shift->count() > 0;
    so.eigen_rate_given = so_rate->count() > 0;
    so.iid_dirs_given = so_iid->count() > 0;
    so.threads_given = so_threads->count() > 0;
    io.z_given = io_z->count() > 0;

    if (fit->parsed()) return run_fit(fo);
    if (sim->parsed()) return run_simulate(so);
    if (infl->parsed()) return run_influence(io);
    return 0;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const CpcaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    bool rep_failure = e.code() == ErrorCode::kFailedConvergence &&
                       e.raw_message().find("replicates failed") != std::string::npos;
    return rep_failure ? kExitRepFailure : kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
