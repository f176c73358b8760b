// kleinsim: analytic oracle curves, channel runs, sweeps and comparison reports.
#include "klein/compare.hpp"
#include "klein/dirac.hpp"
#include "klein/io.hpp"
#include "klein/observables.hpp"
#include "klein/pipeline.hpp"
#include "klein/scattering.hpp"
#include "klein/sweep.hpp"
#include "klein/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace klein;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_usage = 2;

fs::path default_out_root()
{
	if(const char* env = std::getenv("KLEINSIM_OUT"); env && *env) return env;
	return "out";
}

Config load_config(const std::string& path)
{
	try {
		return parse_config(read_text(path));
	} catch(const IoError& e) {
		throw ConfigError(std::string("cannot read config: ") + e.what());
	}
}

void emit(const CsvTable& t, const std::string& out)
{
	if(out.empty() || out == "-")
		std::cout << csv_string(t);
	else
		write_csv(out, t);
}

struct OracleArgs
{
	std::string what = "transmission";
	std::string case_tag = "I";
	std::string config;
	double p_par = 0.0;
	double e_min = 1.0, e_max = 1.5;
	int n = 200;
	double t = 50.0;
	double p_min = -1.5, p_max = 1.5;
	int p_count = 61;
	double V = 2.5, delta = 0.6, L = 24.5;
	bool au = false;
	std::string out;
};

int do_oracle(const OracleArgs& a)
{
	StepParameters s{a.V, a.delta, a.L};
	if(!a.config.empty()) s = StepParameters::from(to_natural_units(load_config(a.config).fields));
	const CaseTag c = parse_case(a.case_tag);
	const double eu = a.au ? PhysicalConstants::energy_unit : 1.0;
	const double pu = a.au ? PhysicalConstants::momentum_unit : 1.0;
	const std::string e_col = a.au ? "E_au" : "E_over_c2";
	const std::string p_col = a.au ? "p_parallel_au" : "p_parallel_over_c";

	CsvTable t;
	t.meta = {{"case", to_string(c)},         {"units", a.au ? "a.u." : "natural"},
	          {"V", format_double(s.V)},      {"delta", format_double(s.delta)},
	          {"L", format_double(s.L)},      {"p_parallel", format_double(a.p_par)}};
	auto energies = [&] {
		std::vector<double> e(a.n);
		for(int i = 0; i < a.n; ++i) e[i] = a.n == 1 ? a.e_min : a.e_min + (a.e_max - a.e_min) * i / (a.n - 1);
		return e;
	};
	if(a.what == "transmission") {
		t.columns = {e_col, "T"};
		for(double E : energies()) t.rows.push_back({E * eu, transmission(c, E, a.p_par, s)});
	} else if(a.what == "window") {
		auto w = klein_window(c, a.p_par, s);
		t.columns = {p_col, "lower", "upper"};
		t.rows.push_back({a.p_par * pu, w.lo * eu, w.hi * eu});
	} else if(a.what == "hund") {
		t.meta.push_back({"t", format_double(a.t)});
		t.columns = {e_col, "rho"};
		auto e = energies();
		auto rho = hund_spectrum(c, a.p_par, a.t, e, s);
		for(std::size_t i = 0; i < e.size(); ++i) t.rows.push_back({e[i] * eu, rho[i]});
	} else if(a.what == "rate") {
		std::vector<double> ps(a.p_count);
		for(int i = 0; i < a.p_count; ++i)
			ps[i] = a.p_count == 1 ? a.p_min : a.p_min + (a.p_max - a.p_min) * i / (a.p_count - 1);
		auto g = rate_profile(c, ps, s);
		t.columns = {p_col, "rate"};
		for(std::size_t i = 0; i < ps.size(); ++i) t.rows.push_back({ps[i] * pu, g[i]});
	} else {
		throw CLI::ValidationError("--what", "unknown oracle quantity: " + a.what);
	}
	emit(t, a.out);
	return exit_ok;
}

struct RunArgs
{
	std::string config;
	std::string out;
	std::string case_tag;
	double p_par = std::nan("");
	int spin = 0;
	std::string backend;
	std::vector<double> density_times;
	bool sweep = false;
	int workers = 0;
	bool force = false;
};

int do_sweep(const RunArgs& a)
{
	Config cfg = load_config(a.config);
	validate(cfg);
	fs::path out = a.out.empty() ? default_out_root() / config_hash(cfg) : fs::path(a.out);
	auto plan = plan_sweep(cfg, out);
	SweepOptions opt;
	opt.workers = a.workers > 0 ? a.workers : cfg.sweep.workers;
	opt.force = a.force;
	opt.progress = [](std::size_t done, std::size_t total) { std::cerr << "\r" << done << "/" << total << std::flush; };
	auto res = run_jobs(plan, opt);
	std::cerr << "\n";
	std::cout << "ran " << res.ran << ", reused " << res.reused << "\n";
	std::cout << "manifest " << res.manifest.string() << "\n";
	return exit_ok;
}

int do_run(const RunArgs& a)
{
	if(a.sweep) return do_sweep(a);
	Config cfg = load_config(a.config);
	validate(cfg);
	const Config nat = to_natural_units(cfg);
	const CaseTag c = a.case_tag.empty() ? cfg.fields.case_tag : parse_case(a.case_tag);
	const double p = std::isnan(a.p_par) ? nat.run.p_parallel : a.p_par;
	const int spin = a.spin == 0 ? cfg.run.spin : a.spin;

	ChannelOptions opt;
	opt.times = sample_times(nat.run.t_max, nat.run.t_step);
	opt.spectrum_times = sample_times(nat.run.t_max, nat.run.spectrum_step);
	opt.backend = cfg.run.backend;
	if(a.backend == "split") opt.backend = Backend::split_operator;
	else if(a.backend == "eigen") opt.backend = Backend::eigen;
	else if(!a.backend.empty()) throw CLI::ValidationError("--backend", "expected eigen or split");
	opt.dt = nat.run.dt;
	opt.density_times = a.density_times;

	auto res = run_channel(cfg, c, p, spin, opt);

	fs::path out = a.out.empty() ? default_out_root() / ("channel_" + config_hash(cfg)) : fs::path(a.out);
	fs::create_directories(out);
	RunManifest m;
	m.config = cfg;
	m.tool_version = tool_version();
	m.started = utc_timestamp();

	CsvTable num;
	num.meta = {{"case", to_string(c)},
	            {"p_parallel_over_c", format_double(p)},
	            {"spin", std::to_string(spin)},
	            {"t", "natural (1/c^2 a.u.)"}};
	num.columns = {"t", "N"};
	for(std::size_t i = 0; i < res.times.size(); ++i) num.rows.push_back({res.times[i], res.number[i]});
	write_csv(out / "number.csv", num);

	Klb1Array rho;
	rho.dims = {static_cast<std::uint64_t>(res.rho_k.rows()), static_cast<std::uint64_t>(res.rho_k.cols())};
	for(Eigen::Index r = 0; r < res.rho_k.rows(); ++r)
		for(Eigen::Index k = 0; k < res.rho_k.cols(); ++k) rho.data.push_back(res.rho_k(r, k));
	write_klb1(out / "rho_k.klb", rho);

	CsvTable ks;
	ks.meta = {{"axis", "lattice momentum"}, {"unit", "c"}};
	ks.columns = {"p_perp_over_c"};
	for(double k : res.k) ks.rows.push_back({k});
	write_csv(out / "k_axis.csv", ks);

	CsvTable st;
	st.meta = {{"rows_of", "rho_k.klb"}};
	st.columns = {"t"};
	for(double t : res.spectrum_times) st.rows.push_back({t});
	write_csv(out / "spectrum_times.csv", st);

	std::vector<std::string> files = {"number.csv", "rho_k.klb", "k_axis.csv", "spectrum_times.csv"};
	for(const auto& d : res.densities) {
		CsvTable dt;
		dt.meta = {{"case", to_string(c)}, {"t", format_double(d.t)}, {"x", "natural (lambda_c)"}};
		dt.columns = {"x", "electron", "positron"};
		for(std::size_t j = 0; j < d.x.size(); ++j) dt.rows.push_back({d.x[j], d.electron[j], d.positron[j]});
		char name[64];
		std::snprintf(name, sizeof name, "density_t%.6g.csv", d.t);
		write_csv(out / name, dt);
		files.emplace_back(name);
	}
	for(const auto& f : files) m.outputs.push_back(manifest_entry((out / f).string()));
	m.timings["channel_seconds"] = res.seconds;
	m.finished = utc_timestamp();
	write_text_atomic(out / "manifest.json", manifest_json(m));
	std::cout << "N(t_max) = " << format_double(res.number.back()) << "\n";
	return exit_ok;
}

struct SpectraArgs
{
	std::string run;
	std::string case_tag = "I";
	double p_par = 0.0;
	double t = -1.0;
	std::string norm = "landauer";
	double bin = 0.0;
	std::string out;
};

const StoredChannel& find_channel(const StoredRun& r, CaseTag c, double p)
{
	const StoredChannel* best = nullptr;
	for(const auto* ch : r.of_case(c))
		if(!best || std::abs(ch->job.p_parallel - p) < std::abs(best->job.p_parallel - p)) best = ch;
	if(!best) throw ConfigError("no stored channel for case " + to_string(c));
	return *best;
}

std::size_t time_index(const std::vector<double>& ts, double t)
{
	if(t < 0) return ts.size() - 1;
	std::size_t best = 0;
	for(std::size_t i = 0; i < ts.size(); ++i)
		if(std::abs(ts[i] - t) < std::abs(ts[best] - t)) best = i;
	return best;
}

int do_spectra(const SpectraArgs& a)
{
	auto run = load_run(a.run);
	const CaseTag c = parse_case(a.case_tag);
	const auto& ch = find_channel(run, c, a.p_par);
	const auto it = time_index(ch.spectrum_times, a.t);
	Eigen::VectorXd row = ch.rho_k.row(it);
	std::vector<double> rho(row.data(), row.data() + row.size());
	const auto norm = parse_normalization(a.norm);

	CsvTable t;
	t.meta = {{"case", to_string(c)},
	          {"p_parallel_over_c", format_double(ch.job.p_parallel)},
	          {"t", format_double(ch.spectrum_times[it])},
	          {"normalization", to_string(norm)},
	          {"energy", "c^2"}};
	if(a.bin > 0) {
		auto edges = uniform_edges(1.0, StepParameters::from(to_natural_units(with_case(run.config, c)).fields).V, a.bin);
		auto b = binned_energy_spectrum(rho, ch.k, ch.job.p_parallel, ch.box_length, edges, Branch::negative_k, norm);
		t.columns = {"E_over_c2", "rho"};
		for(std::size_t i = 0; i < b.size(); ++i) t.rows.push_back({0.5 * (edges[i] + edges[i + 1]), b[i]});
	} else {
		auto s = energy_spectrum(rho, ch.k, ch.job.p_parallel, ch.box_length, norm);
		t.columns = {"E_over_c2", "rho", "rho_negative_k", "rho_positive_k"};
		for(std::size_t i = 0; i < s.energy.size(); ++i)
			t.rows.push_back({s.energy[i], s.total[i], s.negative_k[i], s.positive_k[i]});
	}
	emit(t, a.out);
	return exit_ok;
}

int do_compare(const std::string& run_dir, const std::string& oracle, double tol, const std::string& out)
{
	if(oracle != "auto") throw CLI::ValidationError("--oracle", "only 'auto' is supported");
	auto rep = compare_run(load_run(run_dir), tol);
	auto text = rep.text();
	if(!out.empty()) write_text_atomic(out, text);
	std::cout << text;
	return rep.pass() ? exit_ok : exit_tolerance;
}

int do_plotdata(const std::string& run_dir, const std::string& what, const std::string& out)
{
	auto run = load_run(run_dir);
	CsvTable t;
	t.meta = {{"units", "natural"}, {"quantity", what}};
	if(what == "number") {
		t.columns = {"case", "p_parallel_over_c", "t", "N"};
		for(const auto& ch : run.channels)
			for(std::size_t i = 0; i < ch.times.size(); ++i)
				t.rows.push_back({static_cast<double>(ch.job.case_tag) + 1, ch.job.p_parallel, ch.times[i], ch.number[i]});
	} else if(what == "emd") {
		t.columns = {"case", "p_parallel_over_c", "p_perp_over_c", "rho"};
		for(const auto& ch : run.channels) {
			Eigen::Index last = ch.rho_k.rows() - 1;
			for(std::size_t j = 0; j < ch.k.size(); ++j)
				t.rows.push_back({static_cast<double>(ch.job.case_tag) + 1, ch.job.p_parallel, ch.k[j],
				                  ch.rho_k(last, static_cast<Eigen::Index>(j))});
		}
	} else if(what == "rates") {
		const Config nat = to_natural_units(run.config);
		t.columns = {"case", "p_parallel_over_c", "rate", "rate_error"};
		for(const auto& ch : run.channels) {
			auto f = fit_rate(ch.times, ch.number, nat.run.transient, ch.times.back());
			t.rows.push_back({static_cast<double>(ch.job.case_tag) + 1, ch.job.p_parallel, f.rate, f.rate_error});
		}
	} else {
		throw CLI::ValidationError("--what", "expected number, emd or rates");
	}
	t.meta.push_back({"case", "1=I 2=II 3=III"});
	emit(t, out);
	return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Pair production through combined scalar and vector steps"};
	app.require_subcommand(1);
	app.set_version_flag("--version", tool_version());

	OracleArgs oa;
	auto* oracle = app.add_subcommand("oracle", "analytic T(E), Klein windows, Hund spectra and rate profiles");
	oracle->add_option("--what", oa.what, "transmission|window|hund|rate")->capture_default_str();
	oracle->add_option("--case", oa.case_tag, "I, II or III")->capture_default_str();
	oracle->add_option("--config", oa.config, "take step parameters from a config file");
	oracle->add_option("--p-par", oa.p_par, "parallel momentum (units of c)")->capture_default_str();
	oracle->add_option("--e-min", oa.e_min, "energy (units of c^2)")->capture_default_str();
	oracle->add_option("--e-max", oa.e_max)->capture_default_str();
	oracle->add_option("--n", oa.n)->check(CLI::PositiveNumber)->capture_default_str();
	oracle->add_option("--t", oa.t, "time for the Hund spectrum (natural)")->capture_default_str();
	oracle->add_option("--p-min", oa.p_min)->capture_default_str();
	oracle->add_option("--p-max", oa.p_max)->capture_default_str();
	oracle->add_option("--p-count", oa.p_count)->check(CLI::PositiveNumber)->capture_default_str();
	oracle->add_option("--V", oa.V, "scalar step height (c^2)")->capture_default_str();
	oracle->add_option("--delta", oa.delta, "momentum shift (c)")->capture_default_str();
	oracle->add_option("--L", oa.L, "step separation (lambda_c)")->capture_default_str();
	oracle->add_flag("--au", oa.au, "report raw atomic units");
	oracle->add_option("-o,--out", oa.out, "output CSV (stdout if omitted)");

	RunArgs ra;
	auto* run = app.add_subcommand("run", "simulate one channel, or a whole sweep with --sweep");
	run->add_option("--config", ra.config)->required();
	run->add_option("--out", ra.out, "output directory");
	run->add_option("--case", ra.case_tag);
	run->add_option("--p-par", ra.p_par, "parallel momentum (units of c)");
	run->add_option("--spin", ra.spin)->check(CLI::IsMember({-1, 1}));
	run->add_option("--backend", ra.backend, "eigen|split");
	run->add_option("--density-at", ra.density_times, "times (natural) for spatial densities");
	run->add_flag("--sweep", ra.sweep);
	run->add_option("--workers", ra.workers);
	run->add_flag("--force", ra.force);

	RunArgs sa;
	auto* sweep = app.add_subcommand("sweep", "plan and run the channel sweep, resuming completed jobs");
	sweep->add_option("--config", sa.config)->required();
	sweep->add_option("--out", sa.out, "output directory");
	sweep->add_option("--workers", sa.workers);
	sweep->add_flag("--force", sa.force, "recompute completed jobs");

	SpectraArgs pa;
	auto* spectra = app.add_subcommand("spectra", "energy spectrum of a stored channel at a chosen time");
	spectra->add_option("--run", pa.run)->required();
	spectra->add_option("--case", pa.case_tag)->capture_default_str();
	spectra->add_option("--p-par", pa.p_par)->capture_default_str();
	spectra->add_option("--t", pa.t, "time (natural); last sample if omitted");
	spectra->add_option("--norm", pa.norm, "per_mode|landauer|hund")->capture_default_str();
	spectra->add_option("--bin", pa.bin, "energy bin width (c^2); lattice energies if omitted");
	spectra->add_option("-o,--out", pa.out);

	std::string c_run, c_oracle = "auto", c_out;
	double c_tol = 0.10;
	auto* compare = app.add_subcommand("compare", "numeric vs analytic report from stored outputs");
	compare->add_option("--run", c_run)->required();
	compare->add_option("--oracle", c_oracle)->capture_default_str();
	compare->add_option("--tol", c_tol)->capture_default_str();
	compare->add_option("-o,--out", c_out, "also write the report here");

	std::string d_run, d_what = "number", d_out;
	auto* plot = app.add_subcommand("plotdata", "long-format CSV for external plotting");
	plot->add_option("--run", d_run)->required();
	plot->add_option("--what", d_what, "number|emd|rates")->capture_default_str();
	plot->add_option("-o,--out", d_out);

	try {
		app.parse(argc, argv);
	} catch(const CLI::ParseError& e) {
		int rc = app.exit(e);
		return rc == 0 ? exit_ok : exit_usage;
	}

	try {
		if(*oracle) return do_oracle(oa);
		if(*run) return do_run(ra);
		if(*sweep) return do_sweep(sa);
		if(*spectra) return do_spectra(pa);
		if(*compare) return do_compare(c_run, c_oracle, c_tol, c_out);
		if(*plot) return do_plotdata(d_run, d_what, d_out);
	} catch(const CLI::Error& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_usage;
	} catch(const ConfigError& e) {
		std::cerr << "config error: " << e.what() << "\n";
		return exit_usage;
	} catch(const IoError& e) {
		std::cerr << "I/O error: " << e.what() << "\n";
		return exit_usage;
	} catch(const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_usage;
	}
	return exit_usage;
}
