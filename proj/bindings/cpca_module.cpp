#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "cpca/cauchy_mle.hpp"
#include "cpca/cauchy_pca.hpp"
#include "cpca/influence.hpp"
#include "cpca/linalg.hpp"
#include "cpca/robust_prep.hpp"
#include "cpca/sim.hpp"
#include "cpca/types.hpp"

namespace py = pybind11;
using namespace cpca;

namespace {

CenterMode center_from_name(const std::string& name) {
  if (name == "column") return CenterMode::kColumnMedian;
  if (name == "spatial") return CenterMode::kSpatialMedian;
  if (name == "none") return CenterMode::kNone;
  throw std::invalid_argument("center must be one of column, spatial, none");
}

ScaleMode scale_from_name(const std::string& name) {
  if (name == "mad") return ScaleMode::kMadAboutMedian;
  if (name == "none") return ScaleMode::kNone;
  throw std::invalid_argument("scale must be one of mad, none");
}

py::dict fit_cauchy_pca_py(const Matrix& x, int k, double outer_tol, int max_outer_iters,
                           const std::string& init, std::uint64_t seed) {
  CauchyPcaConfig cfg;
  cfg.k = k;
  cfg.outer_tol = outer_tol;
  cfg.max_outer_iters = max_outer_iters;
  if (init == "classical") {
    cfg.init_mode = InitMode::kClassicalPc;
  } else if (init == "random") {
    cfg.init_mode = InitMode::kRandom;
  } else {
    throw std::invalid_argument("init must be one of classical, random");
  }
  cfg.seed = seed;

  CauchyPcaResult res = fit_cauchy_pca(DataMatrix::validated(x), cfg);
  Matrix directions(k, x.cols());
  Vector mu(k), sigma(k);
  std::vector<int> iterations(static_cast<std::size_t>(k));
  std::vector<bool> converged(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    auto idx = static_cast<std::size_t>(i);
    directions.row(i) = res.directions[idx].coords().transpose();
    mu[i] = res.params[idx].mu;
    sigma[i] = res.params[idx].sigma;
    iterations[idx] = res.iterations[idx];
    converged[idx] = res.converged[idx];
  }
  py::dict out;
  out["directions"] = directions;
  out["mu"] = mu;
  out["sigma"] = sigma;
  out["iterations"] = iterations;
  out["converged"] = converged;
  return out;
}

py::dict fit_cauchy_py(const Vector& c) {
  CauchyFit fit = fit_cauchy(c);
  py::dict out;
  out["mu"] = fit.params.mu;
  out["sigma"] = fit.params.sigma;
  out["iterations"] = fit.iterations;
  return out;
}

py::dict prepare_py(const Matrix& x, const std::string& center, const std::string& scale) {
  CenteringSpec spec{center_from_name(center), scale_from_name(scale)};
  PrepResult prep = prepare(DataMatrix::validated(x), spec);
  py::dict out;
  out["prepped"] = prep.prepped;
  out["center"] = prep.center;
  out["scales"] = prep.scales;
  return out;
}

py::dict classical_first_pc_py(const Matrix& x) {
  LeadingEigen lead = classical_first_pc(DataMatrix::validated(x));
  py::dict out;
  out["direction"] = lead.direction.coords();
  out["eigenvalue"] = lead.eigenvalue;
  return out;
}

Vector pp_first_pc_py(const Matrix& x, std::uint64_t seed) {
  return pp_first_pc(DataMatrix::validated(x), PpIndex::kMad, seed).coords();
}

py::dict classical_if_py(const Vector& z, const Matrix& sigma, const Vector& mu) {
  ClassicalIfResult r = classical_if(z, CovarianceModel::validated(sigma, mu));
  py::dict out;
  out["if_vector"] = r.if_vector;
  out["if_eigenvalue"] = r.if_eigenvalue;
  return out;
}

py::dict cauchy_if_py(const Vector& z, const Matrix& x) {
  DataMatrix data = DataMatrix::validated(x);
  CauchyDirectionFit fit = tight_cauchy_direction_fit(data);
  CauchyIfResult r = cauchy_if(z, data, fit.u_hat, fit.params);
  py::dict out;
  out["if_vector"] = r.if_vector;
  out["b_vector"] = r.b_vector;
  out["singular_a"] = r.singular_a;
  out["singular_fisher"] = r.singular_fisher;
  out["u_hat"] = fit.u_hat;
  return out;
}

Vector empirical_if_py(const Vector& z, const Matrix& x, const std::string& estimator,
                       double eps) {
  IfEstimator est;
  if (estimator == "classical") {
    est = IfEstimator::kClassical;
  } else if (estimator == "cauchy") {
    est = IfEstimator::kCauchy;
  } else {
    throw std::invalid_argument("estimator must be one of classical, cauchy");
  }
  return empirical_if_richardson(z, DataMatrix::validated(x), est, eps);
}

py::dict run_scenario_py(int n, int p, std::optional<double> kappa, double phi_degrees,
                         double contamination, double shift, double eigen_rate, int reps,
                         std::uint64_t seed, const std::string& center,
                         const std::string& scale, bool iid_outlier_dirs, int threads) {
  SimScenario s;
  s.n = n;
  s.p = p;
  s.kappa = kappa;
  s.phi_degrees = phi_degrees;
  s.contamination = contamination;
  s.shift = shift;
  s.eigen_rate = eigen_rate;
  s.reps = reps;
  s.seed = seed;
  s.centering = CenteringSpec{center_from_name(center), scale_from_name(scale)};
  s.iid_outlier_dirs = iid_outlier_dirs;

  ScenarioRow row;
  {
    py::gil_scoped_release release;
    row = run_scenario(s, threads);
  }
  py::dict out;
  out["mean_angle_cauchy"] = row.mean_angle_cauchy;
  out["mean_angle_pp"] = row.mean_angle_pp;
  out["mean_angle_classical"] = row.mean_angle_classical;
  out["mean_runtime_cauchy"] = row.mean_runtime_cauchy;
  out["mean_runtime_pp"] = row.mean_runtime_pp;
  out["mean_runtime_classical"] = row.mean_runtime_classical;
  out["reps_used"] = row.reps_used;
  out["reps_failed"] = row.reps_failed;
  return out;
}

}  // namespace

PYBIND11_MODULE(_cpca, m) {
  m.doc() = "Robust principal component analysis with a Cauchy profile likelihood";

  py::register_exception<CpcaError>(m, "CpcaError");

  m.def("fit_cauchy_pca", &fit_cauchy_pca_py, py::arg("x"), py::arg("k") = 1,
        py::arg("outer_tol") = 1e-6, py::arg("max_outer_iters") = 500,
        py::arg("init") = "classical", py::arg("seed") = 0,
        "Sequential robust principal directions; rows of 'directions' are "
        "unit vectors in canonical sign.");
  m.def("fit_cauchy", &fit_cauchy_py, py::arg("c"),
        "Location/scale maximum-likelihood fit of a 1-D sample.");
  m.def("prepare", &prepare_py, py::arg("x"), py::arg("center") = "column",
        py::arg("scale") = "mad", "Robust centering and scaling.");
  m.def("classical_first_pc", &classical_first_pc_py, py::arg("x"),
        "Leading eigenvector/eigenvalue of the sample covariance.");
  m.def("pp_first_pc", &pp_first_pc_py, py::arg("x"), py::arg("seed") = 0,
        "Projection-pursuit comparator direction (robust-scale index).");
  m.def("classical_if", &classical_if_py, py::arg("z"), py::arg("sigma"), py::arg("mu"),
        "Influence of a point mass at z on the leading classical eigenpair.");
  m.def("cauchy_if", &cauchy_if_py, py::arg("z"), py::arg("x"),
        "Analytic influence of a point mass at z on the first direction, "
        "evaluated at a tight fit on x.");
  m.def("empirical_if", &empirical_if_py, py::arg("z"), py::arg("x"),
        py::arg("estimator") = "cauchy", py::arg("eps") = 0.02,
        "Finite-epsilon influence with Richardson extrapolation.");
  m.def("angle_degrees", &angle_degrees, py::arg("a"), py::arg("b"),
        "Sign-invariant angle between directions, degrees.");
  m.def("run_scenario", &run_scenario_py, py::arg("n") = 100, py::arg("p") = 100,
        py::arg("kappa") = py::none(), py::arg("phi_degrees") = 0.0,
        py::arg("contamination") = 0.02, py::arg("shift") = 50.0,
        py::arg("eigen_rate") = 0.4, py::arg("reps") = 30, py::arg("seed") = 0,
        py::arg("center") = "column", py::arg("scale") = "mad",
        py::arg("iid_outlier_dirs") = false, py::arg("threads") = 1,
        "Monte Carlo angle-error comparison of the three estimators.");

  m.attr("__version__") = kVersion;
}
