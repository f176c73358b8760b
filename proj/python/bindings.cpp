#include "klein/io.hpp"
#include "klein/pipeline.hpp"
#include "klein/scattering.hpp"
#include "klein/sweep.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace klein;

namespace {

StepParameters step(double V, double delta, double L) { return {V, delta, L}; }

py::dict channel_dict(const ChannelResult& r)
{
	py::dict d;
	d["case"] = to_string(r.case_tag);
	d["p_parallel"] = r.p_parallel;
	d["spin"] = r.spin;
	d["times"] = r.times;
	d["number"] = r.number;
	d["spectrum_times"] = r.spectrum_times;
	d["k"] = r.k;
	d["rho_k"] = r.rho_k;
	d["seconds"] = r.seconds;
	return d;
}

} // namespace

PYBIND11_MODULE(_kleinpair, m)
{
	m.doc() = "Pair creation at potential steps: scattering oracle and CQFT channels";

	py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
	py::register_exception<IoError>(m, "IoError", PyExc_OSError);

	m.def(
	    "transmission",
	    [](const std::string& c, double E, double p, double V, double delta, double L) {
		    return transmission(parse_case(c), E, p, step(V, delta, L));
	    },
	    py::arg("case"), py::arg("E"), py::arg("p_parallel") = 0.0, py::arg("V") = 2.5, py::arg("delta") = 0.6,
	    py::arg("L") = 24.5, "Transmission coefficient of the sharp-step model (natural units).");

	m.def(
	    "klein_window",
	    [](const std::string& c, double p, double V, double delta, double L) {
		    auto w = klein_window(parse_case(c), p, step(V, delta, L));
		    return std::make_pair(w.lo, w.hi);
	    },
	    py::arg("case"), py::arg("p_parallel") = 0.0, py::arg("V") = 2.5, py::arg("delta") = 0.6, py::arg("L") = 24.5);

	m.def(
	    "channel_rate",
	    [](const std::string& c, double p, double V, double delta, double L) {
		    return channel_rate(parse_case(c), p, step(V, delta, L));
	    },
	    py::arg("case"), py::arg("p_parallel") = 0.0, py::arg("V") = 2.5, py::arg("delta") = 0.6, py::arg("L") = 24.5,
	    "(2/pi) times the integral of T over the Klein window.");

	m.def(
	    "total_rate",
	    [](const std::string& c, const std::vector<double>& ps, double weight, double V, double delta, double L) {
		    return total_rate(parse_case(c), ps, weight, step(V, delta, L));
	    },
	    py::arg("case"), py::arg("p_grid"), py::arg("weight") = 1.0, py::arg("V") = 2.5, py::arg("delta") = 0.6,
	    py::arg("L") = 24.5);

	m.def(
	    "run_channel",
	    [](const std::string& config_text, const std::string& c, double p, int spin, const std::string& backend,
	       double spectrum_step) {
		    auto cfg = parse_config(config_text);
		    validate(cfg);
		    auto nat = to_natural_units(cfg);
		    ChannelOptions o;
		    o.times = sample_times(nat.run.t_max, nat.run.t_step);
		    o.spectrum_times = sample_times(nat.run.t_max, spectrum_step > 0 ? spectrum_step : nat.run.spectrum_step);
		    o.backend = backend == "split" ? Backend::split_operator : Backend::eigen;
		    o.dt = nat.run.dt;
		    py::gil_scoped_release release;
		    auto r = run_channel(cfg, parse_case(c), p, spin, o);
		    py::gil_scoped_acquire acquire;
		    return channel_dict(r);
	    },
	    py::arg("config"), py::arg("case"), py::arg("p_parallel") = 0.0, py::arg("spin") = 1,
	    py::arg("backend") = "eigen", py::arg("spectrum_step") = 0.0,
	    "Evolve one channel of an INI configuration; times and momenta in natural units.");

	m.def(
	    "load_run",
	    [](const std::filesystem::path& dir) {
		    auto run = load_run(dir);
		    py::list out;
		    for(const auto& ch : run.channels) {
			    py::dict d;
			    d["case"] = to_string(ch.job.case_tag);
			    d["p_parallel"] = ch.job.p_parallel;
			    d["times"] = ch.times;
			    d["number"] = ch.number;
			    d["spectrum_times"] = ch.spectrum_times;
			    d["k"] = ch.k;
			    d["rho_k"] = ch.rho_k;
			    out.append(d);
		    }
		    return out;
	    },
	    py::arg("run_dir"), "Stored channels of a sweep directory.");

	m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });
}
