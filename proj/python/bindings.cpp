#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "noisywalk/boundary.hpp"
#include "noisywalk/errors.hpp"
#include "noisywalk/estimators.hpp"
#include "noisywalk/io.hpp"
#include "noisywalk/oracle.hpp"

namespace py = pybind11;
using namespace noisywalk;

namespace {

py::dict estimate_dict(const EstimateResult& r) {
  py::dict d;
  d["rho"] = r.rho;
  d["n"] = r.n;
  d["trials"] = r.trials;
  d["seed"] = r.seed;
  d["method"] = r.method;
  d["value"] = r.value;
  d["std_error"] = r.std_error;
  d["ci_low"] = r.ci_low;
  d["ci_high"] = r.ci_high;
  return d;
}

FiniteMeasure measure_from_string(const std::string& text) {
  return measure_from_json(nlohmann::json::parse(text));
}

py::list atoms(const FiniteMeasure& m) {
  py::list out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    py::object word = m.kind() == MeasureKind::pair
                          ? py::object(py::make_tuple(to_indices(m.first(i)), to_indices(m.second(i))))
                          : py::object(py::cast(to_indices(m.first(i))));
    out.append(py::make_tuple(word, m.weight(i)));
  }
  return out;
}

py::dict local_dimension_run(const FiniteMeasure& mu, double rho, int horizon, std::int64_t samples,
                             int t_max, std::uint64_t seed, std::int64_t centers, unsigned workers) {
  LocalDimension d;
  {
    py::gil_scoped_release release;
    const auto s = sample_boundary(mu, rho, horizon, samples, seed, workers);
    const CylinderTree tree(s, t_max);
    std::vector<int> grid;
    for (int t = 1; t <= t_max; ++t) grid.push_back(t);
    d = local_dimension(s, tree, grid, centers, seed);
  }
  py::dict out = estimate_dict(d.slope);
  out["rho"] = rho;
  out["centers_used"] = d.centers_used;
  out["centers_skipped"] = d.centers_skipped;
  out["dropped_points"] = d.dropped_points;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Noisy coupled random walks on free groups and free semigroups";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<UnsupportedRegimeError>(m, "UnsupportedRegimeError", PyExc_ValueError);
  auto budget = py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<TruncationError>(m, "TruncationError", budget.ptr());

  py::class_<FiniteMeasure>(m, "Measure")
      .def_property_readonly("rank", &FiniteMeasure::rank)
      .def_property_readonly("kind", [](const FiniteMeasure& x) { return std::string(to_string(x.kind())); })
      .def_property_readonly("is_exact", &FiniteMeasure::is_exact)
      .def("__len__", &FiniteMeasure::size)
      .def("atoms", &atoms, "List of (word, weight); words are signed generator indices.")
      .def("entropy", &shannon_entropy)
      .def("first_moment", &first_moment)
      .def("to_json", [](const FiniteMeasure& x) { return measure_to_json(x).dump(); })
      .def("__repr__", [](const FiniteMeasure& x) {
        std::ostringstream s;
        s << "<Measure " << to_string(x.kind()) << " rank=" << x.rank() << " atoms=" << x.size() << ">";
        return s.str();
      });

  m.def("free_group_srw", &free_group_srw, py::arg("k"));
  m.def("free_semigroup_uniform", &free_semigroup_uniform, py::arg("m"));
  m.def("measure_from_json", &measure_from_string, py::arg("text"));
  m.def("build_pi_rho", py::overload_cast<const FiniteMeasure&, double>(&build_pi_rho),
        py::arg("mu"), py::arg("rho"));

  m.def("h_semigroup", [](int mm, double rho) { return h_semigroup({mm, rho}); }, py::arg("m"),
        py::arg("rho"));
  m.def("h_semigroup_derivative", [](int mm, double rho) { return h_semigroup_derivative({mm, rho}); },
        py::arg("m"), py::arg("rho"));
  m.def("tv_semigroup", [](int mm, double rho, int n) { return tv_semigroup({mm, rho}, n); },
        py::arg("m"), py::arg("rho"), py::arg("n"));
  m.def("drift_free_group_srw", &drift_free_group_srw, py::arg("k"));

  m.def(
      "drift_mc",
      [](const FiniteMeasure& step, int n, std::int64_t trials, std::uint64_t seed, unsigned workers) {
        DriftEstimate d;
        {
          py::gil_scoped_release release;
          d = drift_mc(step, n, trials, seed, workers);
        }
        py::dict out;
        out["combined"] = estimate_dict(d.combined);
        out["first"] = estimate_dict(d.first);
        out["second"] = estimate_dict(d.second);
        return out;
      },
      py::arg("step"), py::arg("n"), py::arg("trials"), py::arg("seed"), py::arg("workers") = 0);

  m.def(
      "shannon_pointwise",
      [](int mm, double rho, int n, std::int64_t trials, std::uint64_t seed, unsigned workers) {
        EstimateResult r;
        {
          py::gil_scoped_release release;
          r = shannon_pointwise(mm, rho, n, trials, seed, workers);
        }
        return estimate_dict(r);
      },
      py::arg("m"), py::arg("rho"), py::arg("n"), py::arg("trials"), py::arg("seed"),
      py::arg("workers") = 0);

  m.def(
      "entropy_exact_curve",
      [](const FiniteMeasure& step, int n_max, std::size_t cap, bool truncate) {
        ConvolutionOptions o;
        o.cap = cap;
        if (truncate) o.on_overflow = OverflowPolicy::truncate;
        const EntropyCurve c = entropy_exact_curve(step, n_max, o);
        py::dict out;
        out["values"] = c.values;
        out["increments"] = c.increments;
        out["upper_rate"] = c.upper_rate;
        out["exact"] = c.exact;
        std::vector<bool> truncated;
        for (const auto& t : c.truncation) truncated.push_back(t.truncated);
        out["truncated"] = truncated;
        try {
          const RateBracket b = entropy_rate_estimate(c);
          out["h_lower"] = b.h_increment;
          out["h_upper"] = b.h_upper;
        } catch (const InputError&) {
          out["h_lower"] = py::none();
          out["h_upper"] = py::none();
        }
        return out;
      },
      py::arg("step"), py::arg("n_max"), py::arg("cap") = std::size_t{1} << 23,
      py::arg("truncate") = false);

  m.def("tv_exact", &tv_exact, py::arg("mu"), py::arg("rho"), py::arg("n"),
        py::arg("cap") = std::size_t{1} << 23);
  m.def(
      "tv_lower_bound_mc",
      [](const FiniteMeasure& mu, double rho, int n, std::uint64_t seed, double c,
         std::int64_t trials, unsigned workers) {
        TvLowerBound b;
        {
          py::gil_scoped_release release;
          b = tv_lower_bound_mc(mu, rho, n, c, trials, seed, workers);
        }
        py::dict out = estimate_dict(b.bound);
        out["p_coupled"] = b.p_coupled;
        out["p_independent"] = b.p_independent;
        out["threshold"] = b.threshold;
        return out;
      },
      py::arg("mu"), py::arg("rho"), py::arg("n"), py::arg("seed"), py::arg("c") = 0.2,
      py::arg("trials") = 100000, py::arg("workers") = 0);

  m.def("parse_rho_grid", &parse_rho_grid, py::arg("spec"));

  m.def(
      "rho_sweep",
      [](const FiniteMeasure& mu, std::vector<double> grid, std::uint64_t seed, int entropy_n,
         std::int64_t entropy_trials, int drift_n, std::int64_t drift_trials, std::vector<int> tv_n,
         std::optional<double> margin, unsigned workers) {
        SweepParams p;
        p.seed = seed;
        p.entropy_n = entropy_n;
        p.entropy_trials = entropy_trials;
        p.drift_n = drift_n;
        p.drift_trials = drift_trials;
        p.tv_n = std::move(tv_n);
        p.workers = workers;
        SweepTable t;
        {
          py::gil_scoped_release release;
          t = rho_sweep(mu, grid, p);
        }
        py::list rows;
        for (const SweepRow& r : t.rows) {
          py::dict row;
          row["rho"] = r.rho;
          row["entropy"] = estimate_dict(r.entropy);
          row["entropy_closed_form"] = r.entropy_closed_form ? py::cast(*r.entropy_closed_form) : py::none();
          row["drift"] = estimate_dict(r.drift);
          row["tv"] = r.tv;
          rows.append(row);
        }
        py::dict out;
        out["rows"] = rows;
        out["rho_star"] = py::none();
        if (t.rows.size() >= 2 && t.rows.back().rho == 1.0) {
          const RhoStar s = rho_star_estimate(t, margin);
          py::dict star;
          star["rho_star"] = s.rho_star;
          star["margin"] = s.margin;
          star["warning"] = s.warning;
          star["message"] = s.message;
          out["rho_star"] = star;
        }
        return out;
      },
      py::arg("mu"), py::arg("grid"), py::arg("seed"), py::arg("entropy_n") = 2000,
      py::arg("entropy_trials") = 200, py::arg("drift_n") = 500, py::arg("drift_trials") = 200,
      py::arg("tv_n") = std::vector<int>{}, py::arg("margin") = py::none(), py::arg("workers") = 0);

  m.def("local_dimension", &local_dimension_run, py::arg("mu"), py::arg("rho"),
        py::arg("horizon"), py::arg("samples"), py::arg("t_max"), py::arg("seed"),
        py::arg("centers") = 1000, py::arg("workers") = 0);

  m.def(
      "dimension_singularity_check",
      [](const FiniteMeasure& mu, double rho, double rho_prime, std::uint64_t seed, int horizon,
         std::int64_t samples, int t_max, std::int64_t centers, unsigned workers) {
        SingularityParams p;
        p.horizon = horizon;
        p.samples = samples;
        for (int t = 1; t <= t_max; ++t) p.t_grid.push_back(t);
        p.centers = centers;
        p.seed = seed;
        p.workers = workers;
        SingularityReport r;
        {
          py::gil_scoped_release release;
          r = dimension_singularity_check(mu, rho, rho_prime, p);
        }
        py::dict out;
        out["dim_a"] = r.dim_a.slope.value;
        out["dim_b"] = r.dim_b.slope.value;
        out["dim_cross"] = r.dim_cross.slope.value;
        out["gap"] = r.gap;
        out["gap_std_error"] = r.gap_std_error;
        out["gap_ci"] = py::make_tuple(r.gap_ci.low, r.gap_ci.high);
        out["conclusive"] = r.conclusive;
        return out;
      },
      py::arg("mu"), py::arg("rho"), py::arg("rho_prime"), py::arg("seed"),
      py::arg("horizon") = 400, py::arg("samples") = 20000, py::arg("t_max") = 100,
      py::arg("centers") = 1000, py::arg("workers") = 0);
}
