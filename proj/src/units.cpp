#include "klein/units.hpp"

#include "klein/io.hpp"

#include <json.hpp>
#include <zlib.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace klein {

namespace {

constexpr double c_ = PhysicalConstants::c;

bool is_finite(double v) { return std::isfinite(v); }

void require_finite(double v, const char* name)
{
	if(!is_finite(v)) throw ConfigError(std::string("non-finite value for ") + name);
}

std::string trim(const std::string& s)
{
	auto b = s.find_first_not_of(" \t\r\n");
	if(b == std::string::npos) return {};
	auto e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

} // namespace

std::string to_string(CaseTag c)
{
	switch(c) {
	case CaseTag::I: return "I";
	case CaseTag::II: return "II";
	case CaseTag::III: return "III";
	}
	return "?";
}

CaseTag parse_case(const std::string& s)
{
	auto t = trim(s);
	if(t == "I" || t == "1") return CaseTag::I;
	if(t == "II" || t == "2") return CaseTag::II;
	if(t == "III" || t == "3") return CaseTag::III;
	throw ConfigError("unknown case tag '" + s + "' (expected I, II or III)");
}

std::string to_string(ProfileKind p) { return p == ProfileKind::tanh ? "tanh" : "sharp-step"; }

ProfileKind parse_profile_kind(const std::string& s)
{
	auto t = trim(s);
	if(t == "tanh") return ProfileKind::tanh;
	if(t == "sharp-step" || t == "sharp_step" || t == "sharp") return ProfileKind::sharp_step;
	throw ConfigError("unknown profile_kind '" + s + "'");
}

double FieldConfiguration::delta() const { return units == UnitSystem::natural ? e_A0 : e_A0 / c_; }

double Grid1D::position(std::int64_t j) const { return -box_length / 2 + (static_cast<double>(j) + 0.5) * dx(); }

double Grid1D::momentum(std::int64_t j) const
{
	std::int64_t m = j < (n_points + 1) / 2 ? j : j - n_points;
	return 2 * std::numbers::pi * static_cast<double>(m) / box_length;
}

std::vector<double> Grid1D::positions() const
{
	std::vector<double> x(n_points);
	for(std::int64_t j = 0; j < n_points; ++j) x[j] = position(j);
	return x;
}

std::vector<double> Grid1D::momenta() const
{
	std::vector<double> k(n_points);
	for(std::int64_t j = 0; j < n_points; ++j) k[j] = momentum(j);
	return k;
}

double Grid1D::cutoff() const { return std::numbers::pi / dx(); }

double time_to_natural(double t_au) { return t_au * c_ * c_; }
double time_to_atomic(double t_nat) { return t_nat / (c_ * c_); }

FieldConfiguration to_natural_units(const FieldConfiguration& f)
{
	if(f.units == UnitSystem::natural) return f;
	require_finite(f.e_phi0, "fields.e_phi0");
	require_finite(f.e_A0, "fields.e_A0");
	require_finite(f.W_v, "fields.W_v");
	require_finite(f.W_a, "fields.W_a");
	require_finite(f.x_B, "fields.x_B");
	require_finite(f.L, "fields.L");
	FieldConfiguration n = f;
	n.e_phi0 = f.e_phi0 / (c_ * c_);
	n.e_A0 = f.e_A0 / (c_ * c_);
	n.W_v = f.W_v * c_;
	n.W_a = f.W_a * c_;
	n.x_B = f.x_B * c_;
	n.L = f.L * c_;
	n.units = UnitSystem::natural;
	return n;
}

FieldConfiguration to_atomic_units(const FieldConfiguration& f)
{
	if(f.units == UnitSystem::atomic) return f;
	FieldConfiguration a = f;
	a.e_phi0 = f.e_phi0 * (c_ * c_);
	a.e_A0 = f.e_A0 * (c_ * c_);
	a.W_v = f.W_v / c_;
	a.W_a = f.W_a / c_;
	a.x_B = f.x_B / c_;
	a.L = f.L / c_;
	a.units = UnitSystem::atomic;
	return a;
}

Grid1D to_natural_units(const Grid1D& g)
{
	if(g.units == UnitSystem::natural) return g;
	require_finite(g.box_length, "grid.box_length");
	require_finite(g.closure_width, "grid.closure_width");
	Grid1D n = g;
	n.box_length = g.box_length * c_;
	n.closure_width = g.closure_width * c_;
	n.units = UnitSystem::natural;
	return n;
}

Grid1D to_atomic_units(const Grid1D& g)
{
	if(g.units == UnitSystem::atomic) return g;
	Grid1D a = g;
	a.box_length = g.box_length / c_;
	a.closure_width = g.closure_width / c_;
	a.units = UnitSystem::atomic;
	return a;
}

RunControls to_natural_units(const RunControls& r)
{
	if(r.units == UnitSystem::natural) return r;
	require_finite(r.t_max, "run.t_max");
	require_finite(r.t_step, "run.t_step");
	require_finite(r.spectrum_step, "run.spectrum_step");
	require_finite(r.dt, "run.dt");
	require_finite(r.transient, "run.transient");
	require_finite(r.p_parallel, "run.p_parallel");
	RunControls n = r;
	n.t_max = time_to_natural(r.t_max);
	n.t_step = time_to_natural(r.t_step);
	n.spectrum_step = time_to_natural(r.spectrum_step);
	n.dt = time_to_natural(r.dt);
	n.transient = time_to_natural(r.transient);
	n.p_parallel = r.p_parallel / c_;
	n.units = UnitSystem::natural;
	return n;
}

RunControls to_atomic_units(const RunControls& r)
{
	if(r.units == UnitSystem::atomic) return r;
	RunControls a = r;
	a.t_max = time_to_atomic(r.t_max);
	a.t_step = time_to_atomic(r.t_step);
	a.spectrum_step = time_to_atomic(r.spectrum_step);
	a.dt = time_to_atomic(r.dt);
	a.transient = time_to_atomic(r.transient);
	a.p_parallel = r.p_parallel * c_;
	a.units = UnitSystem::atomic;
	return a;
}

SweepControls to_natural_units(const SweepControls& s)
{
	if(s.units == UnitSystem::natural) return s;
	require_finite(s.p_min, "sweep.p_min");
	require_finite(s.p_max, "sweep.p_max");
	SweepControls n = s;
	n.p_min = s.p_min / c_;
	n.p_max = s.p_max / c_;
	n.units = UnitSystem::natural;
	return n;
}

SweepControls to_atomic_units(const SweepControls& s)
{
	if(s.units == UnitSystem::atomic) return s;
	SweepControls a = s;
	a.p_min = s.p_min * c_;
	a.p_max = s.p_max * c_;
	a.units = UnitSystem::atomic;
	return a;
}

Config to_natural_units(const Config& c)
{
	return {to_natural_units(c.fields), to_natural_units(c.grid), to_natural_units(c.run), to_natural_units(c.sweep)};
}

Config to_atomic_units(const Config& c)
{
	return {to_atomic_units(c.fields), to_atomic_units(c.grid), to_atomic_units(c.run), to_atomic_units(c.sweep)};
}

double parse_quantity(const std::string& text)
{
	std::string s = trim(text);
	if(s.empty()) throw ConfigError("empty numeric value");
	std::size_t used = 0;
	double v;
	try {
		v = std::stod(s, &used);
	} catch(const std::exception&) {
		throw ConfigError("not a number: '" + text + "'");
	}
	std::string unit = trim(s.substr(used));
	if(!unit.empty() && unit[0] == '*') unit = trim(unit.substr(1));
	double scale = 1.0;
	if(unit.empty()) scale = 1.0;
	else if(unit == "c^2" || unit == "c2" || unit == "c²") scale = c_ * c_;
	else if(unit == "c") scale = c_;
	else if(unit == "lambda_c" || unit == "λ_c") scale = 1.0 / c_;
	else if(unit == "tau_c") scale = 1.0 / (c_ * c_);
	else throw ConfigError("unknown unit suffix '" + unit + "' in '" + text + "'");
	v *= scale;
	if(!is_finite(v)) throw ConfigError("non-finite value '" + text + "'");
	return v;
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys()
{
	static const std::map<std::string, std::set<std::string>> keys = {
		{"fields", {"case", "e_phi0", "e_A0", "W_v", "W_a", "x_B", "L", "profile_kind"}},
		{"grid", {"n_points", "box_length", "closure_width"}},
		{"run", {"t_max", "t_step", "spectrum_step", "dt", "transient", "backend", "p_parallel", "spin"}},
		{"sweep", {"cases", "p_min", "p_max", "p_count", "workers"}},
	};
	return keys;
}

std::vector<CaseTag> parse_case_list(const std::string& s)
{
	std::vector<CaseTag> out;
	std::stringstream ss(s);
	std::string item;
	while(std::getline(ss, item, ',')) {
		if(trim(item).empty()) continue;
		out.push_back(parse_case(item));
	}
	if(out.empty()) throw ConfigError("sweep.cases: empty case list");
	return out;
}

} // namespace

Config parse_config(const std::string& text)
{
	namespace pt = boost::property_tree;
	pt::ptree tree;
	try {
		std::istringstream in(text);
		pt::read_ini(in, tree);
	} catch(const pt::ini_parser_error& e) {
		throw ConfigError(std::string("malformed configuration: ") + e.message() + " (line " +
		                  std::to_string(e.line()) + ")");
	}

	for(const auto& [section, body] : tree) {
		auto it = known_keys().find(section);
		if(it == known_keys().end()) {
			if(body.empty()) throw ConfigError("top-level key '" + section + "' outside any section");
			throw ConfigError("unknown section [" + section + "]");
		}
		for(const auto& [key, _] : body)
			if(!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
	}

	auto get = [&](const std::string& path) -> std::optional<std::string> {
		auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'));
		if(!v) return std::nullopt;
		return trim(*v);
	};

	std::vector<std::string> missing;
	for(const char* k : {"fields.case", "fields.e_phi0", "run.t_max"})
		if(!get(k)) missing.emplace_back(k);

	Config c;
	auto& f = c.fields;
	std::optional<CaseTag> tag;
	if(auto v = get("fields.case")) tag = parse_case(*v);
	if(tag && *tag != CaseTag::I) {
		for(const char* k : {"fields.e_A0", "fields.x_B"})
			if(!get(k)) missing.emplace_back(k);
	}
	if(!missing.empty()) {
		std::string msg = "missing mandatory keys:";
		for(auto& m : missing) msg += " " + m;
		throw ConfigError(msg);
	}

	auto quantity = [&](const std::string& path, double fallback) {
		auto v = get(path);
		if(!v) return fallback;
		try {
			return parse_quantity(*v);
		} catch(const ConfigError& e) {
			throw ConfigError(path + ": " + e.what());
		}
	};
	auto integer = [&](const std::string& path, std::int64_t fallback) -> std::int64_t {
		auto v = get(path);
		if(!v) return fallback;
		std::size_t used = 0;
		long long n;
		try {
			n = std::stoll(*v, &used);
		} catch(const std::exception&) {
			throw ConfigError(path + ": not an integer '" + *v + "'");
		}
		if(used != v->size()) throw ConfigError(path + ": not an integer '" + *v + "'");
		return n;
	};

	f.case_tag = *tag;
	f.e_phi0 = quantity("fields.e_phi0", 0.0);
	f.e_A0 = quantity("fields.e_A0", 0.0);
	f.W_v = quantity("fields.W_v", 0.1 / c_);
	f.W_a = quantity("fields.W_a", 0.1 / c_);
	f.x_B = quantity("fields.x_B", 0.0);
	f.L = quantity("fields.L", std::abs(f.x_B));
	if(auto v = get("fields.profile_kind")) f.profile_kind = parse_profile_kind(*v);
	f.units = UnitSystem::atomic;

	auto& g = c.grid;
	g.n_points = integer("grid.n_points", 1024);
	g.box_length = quantity("grid.box_length", 200.0 / c_);
	g.closure_width = quantity("grid.closure_width", 5.0 / c_);
	g.units = UnitSystem::atomic;

	auto& r = c.run;
	r.t_max = quantity("run.t_max", 0.0);
	r.t_step = quantity("run.t_step", time_to_atomic(1.0));
	r.spectrum_step = quantity("run.spectrum_step", r.t_step);
	r.dt = quantity("run.dt", time_to_atomic(0.02));
	r.transient = quantity("run.transient", time_to_atomic(5.0));
	if(auto v = get("run.backend")) {
		if(*v == "eigen") r.backend = Backend::eigen;
		else if(*v == "split" || *v == "split_operator" || *v == "split-operator") r.backend = Backend::split_operator;
		else throw ConfigError("run.backend: unknown backend '" + *v + "'");
	}
	r.p_parallel = quantity("run.p_parallel", 0.0);
	r.spin = static_cast<int>(integer("run.spin", 1));
	r.units = UnitSystem::atomic;

	auto& s = c.sweep;
	if(auto v = get("sweep.cases")) s.cases = parse_case_list(*v);
	else s.cases = {f.case_tag};
	s.p_min = quantity("sweep.p_min", r.p_parallel);
	s.p_max = quantity("sweep.p_max", r.p_parallel);
	s.p_count = integer("sweep.p_count", 1);
	s.workers = static_cast<int>(integer("sweep.workers", 1));
	s.units = UnitSystem::atomic;

	validate(c);
	return c;
}

std::string serialize_config(const Config& in)
{
	Config c = to_atomic_units(in);
	std::ostringstream o;
	o << "[fields]\n";
	o << "case = " << to_string(c.fields.case_tag) << "\n";
	o << "e_phi0 = " << fmt(c.fields.e_phi0) << "\n";
	o << "e_A0 = " << fmt(c.fields.e_A0) << "\n";
	o << "W_v = " << fmt(c.fields.W_v) << "\n";
	o << "W_a = " << fmt(c.fields.W_a) << "\n";
	o << "x_B = " << fmt(c.fields.x_B) << "\n";
	o << "L = " << fmt(c.fields.L) << "\n";
	o << "profile_kind = " << to_string(c.fields.profile_kind) << "\n";
	o << "\n[grid]\n";
	o << "n_points = " << c.grid.n_points << "\n";
	o << "box_length = " << fmt(c.grid.box_length) << "\n";
	o << "closure_width = " << fmt(c.grid.closure_width) << "\n";
	o << "\n[run]\n";
	o << "t_max = " << fmt(c.run.t_max) << "\n";
	o << "t_step = " << fmt(c.run.t_step) << "\n";
	o << "spectrum_step = " << fmt(c.run.spectrum_step) << "\n";
	o << "dt = " << fmt(c.run.dt) << "\n";
	o << "transient = " << fmt(c.run.transient) << "\n";
	o << "backend = " << (c.run.backend == Backend::eigen ? "eigen" : "split") << "\n";
	o << "p_parallel = " << fmt(c.run.p_parallel) << "\n";
	o << "spin = " << c.run.spin << "\n";
	o << "\n[sweep]\n";
	o << "cases = ";
	for(std::size_t i = 0; i < c.sweep.cases.size(); ++i) o << (i ? "," : "") << to_string(c.sweep.cases[i]);
	o << "\n";
	o << "p_min = " << fmt(c.sweep.p_min) << "\n";
	o << "p_max = " << fmt(c.sweep.p_max) << "\n";
	o << "p_count = " << c.sweep.p_count << "\n";
	o << "workers = " << c.sweep.workers << "\n";
	return o.str();
}

void validate(const FieldConfiguration& in)
{
	auto f = to_natural_units(in);
	if(!(f.e_phi0 > 2.0))
		throw ConfigError("fields.e_phi0: must exceed 2c^2 for a nonempty Klein region (got " + fmt(f.e_phi0) + "c^2)");
	if(f.profile_kind == ProfileKind::tanh) {
		if(!(f.W_v > 0)) throw ConfigError("fields.W_v: must be positive for tanh profiles");
		if(!(f.W_a > 0)) throw ConfigError("fields.W_a: must be positive for tanh profiles");
	}
	if(f.L < 0) throw ConfigError("fields.L: must be nonnegative");
	switch(f.case_tag) {
	case CaseTag::I:
		if(f.e_A0 != 0.0) throw ConfigError("fields.e_A0: Case I requires e_A0 = 0");
		break;
	case CaseTag::II:
		if(f.x_B != f.L) throw ConfigError("fields.x_B: Case II requires x_B = +L");
		break;
	case CaseTag::III:
		if(f.x_B != -f.L) throw ConfigError("fields.x_B: Case III requires x_B = -L");
		break;
	}
}

void validate(const Config& c)
{
	validate(c.fields);
	const auto& g = c.grid;
	if(g.n_points < 4 || (g.n_points & (g.n_points - 1)) != 0)
		throw ConfigError("grid.n_points: must be a power of two >= 4");
	if(!(g.box_length > 0)) throw ConfigError("grid.box_length: must be positive");
	if(!(g.closure_width > 0)) throw ConfigError("grid.closure_width: must be positive");
	const auto& r = c.run;
	if(!(r.t_max >= 0)) throw ConfigError("run.t_max: must be nonnegative");
	if(!(r.t_step > 0)) throw ConfigError("run.t_step: must be positive");
	if(!(r.spectrum_step > 0)) throw ConfigError("run.spectrum_step: must be positive");
	{
		double ratio = r.spectrum_step / r.t_step;
		if(std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
			throw ConfigError("run.spectrum_step: must be a whole multiple of run.t_step");
	}
	if(!(r.dt > 0)) throw ConfigError("run.dt: must be positive");
	if(!(r.transient >= 0)) throw ConfigError("run.transient: must be nonnegative");
	if(r.spin != 1 && r.spin != -1) throw ConfigError("run.spin: must be +1 or -1");
	const auto& s = c.sweep;
	if(s.p_count < 1) throw ConfigError("sweep.p_count: must be >= 1");
	if(s.p_count > 1 && !(s.p_max > s.p_min)) throw ConfigError("sweep.p_max: must exceed sweep.p_min");
	if(s.workers < 1) throw ConfigError("sweep.workers: must be >= 1");
	auto n = to_natural_units(c);
	validate_grid(n.grid, n.fields, n.run.t_max);
}

double max_klein_momentum(const FieldConfiguration& in)
{
	auto f = to_natural_units(in);
	const double V = f.e_phi0;
	const double D = f.case_tag == CaseTag::I ? 0.0 : f.delta();
	double best = 0.0;
	const int n = 4001;
	for(int i = 0; i < n; ++i) {
		double p = -V + 2 * V * i / (n - 1);
		double pf = p - D;
		double lo = std::sqrt(1 + p * p);
		double hi = V - std::sqrt(1 + pf * pf);
		if(hi <= lo) continue;
		best = std::max(best, std::sqrt(std::max(0.0, hi * hi - 1 - p * p)));
		double ef = V - lo;
		best = std::max(best, std::sqrt(std::max(0.0, ef * ef - 1 - pf * pf)));
	}
	return best;
}

void validate_grid(const Grid1D& g, const FieldConfiguration& f, double t_max)
{
	if(g.units != UnitSystem::natural || f.units != UnitSystem::natural)
		throw ConfigError("validate_grid expects natural units");
	double pmax = max_klein_momentum(f);
	if(g.cutoff() < 5 * pmax)
		throw ConfigError("grid.n_points: momentum cutoff pi/dx = " + fmt(g.cutoff()) +
		                  " below 5x the largest Klein momentum " + fmt(pmax));
	double need = 2 * (t_max + std::abs(f.x_B)) + 10;
	if(g.box_length < need)
		throw ConfigError("grid.box_length: " + fmt(g.box_length) + " lambda_c too short for t_max; need >= " +
		                  fmt(need) + " lambda_c");
}

std::pair<double, double> field_profiles(const FieldConfiguration& f, double x)
{
	double phi, A = 0.0;
	if(f.profile_kind == ProfileKind::tanh) {
		phi = f.e_phi0 / 2 * (1 + std::tanh(x / f.W_v));
		if(f.case_tag != CaseTag::I) A = f.e_A0 / 2 * (1 + std::tanh((x - f.x_B) / f.W_a));
	} else {
		phi = x > 0 ? f.e_phi0 : (x < 0 ? 0.0 : f.e_phi0 / 2);
		if(f.case_tag != CaseTag::I) {
			double d = x - f.x_B;
			A = d > 0 ? f.e_A0 : (d < 0 ? 0.0 : f.e_A0 / 2);
		}
	}
	return {phi, A};
}

GridPotentials grid_potentials(const Grid1D& g, const FieldConfiguration& f)
{
	if(g.units != UnitSystem::natural || f.units != UnitSystem::natural)
		throw ConfigError("grid_potentials expects natural units");
	const double half = g.box_length / 2;
	auto step = [&](double d, double w) {
		double s = f.profile_kind == ProfileKind::tanh ? std::tanh(d / w) : (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0));
		return 0.5 * (1 + s * std::tanh((half - std::abs(d)) / g.closure_width));
	};
	auto wrap = [&](double d) {
		d = std::fmod(d + half, g.box_length);
		if(d < 0) d += g.box_length;
		return d - half;
	};
	GridPotentials p;
	p.v.resize(g.n_points);
	p.a.assign(g.n_points, 0.0);
	for(std::int64_t j = 0; j < g.n_points; ++j) {
		double x = g.position(j);
		p.v[j] = f.e_phi0 * step(x, f.W_v);
		if(f.case_tag != CaseTag::I && f.e_A0 != 0.0) p.a[j] = f.e_A0 * step(wrap(x - f.x_B), f.W_a);
	}
	return p;
}

std::string config_hash(const Config& c)
{
	std::string s = serialize_config(c);
	auto* data = reinterpret_cast<const Bytef*>(s.data());
	uLong a = crc32(0L, data, static_cast<uInt>(s.size()));
	uLong b = adler32(1L, data, static_cast<uInt>(s.size()));
	char buf[32];
	std::snprintf(buf, sizeof buf, "%08lx%08lx", a & 0xffffffffUL, b & 0xffffffffUL);
	return buf;
}

std::string tool_version() { return "0.1.0"; }

std::string utc_timestamp()
{
	auto now = std::chrono::system_clock::now();
	std::time_t tt = std::chrono::system_clock::to_time_t(now);
	std::tm tm{};
	gmtime_r(&tt, &tm);
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
	return buf;
}

ManifestEntry manifest_entry(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if(!in) throw std::runtime_error("cannot read " + path);
	std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	ManifestEntry e;
	e.path = path;
	e.bytes = bytes.size();
	e.crc32 = file_checksum(bytes);
	return e;
}

bool verify_manifest(const RunManifest& m, std::string* problem)
{
	for(const auto& e : m.outputs) {
		if(!std::filesystem::exists(e.path)) {
			if(problem) *problem = "missing output " + e.path;
			return false;
		}
		auto now = manifest_entry(e.path);
		if(now.crc32 != e.crc32 || now.bytes != e.bytes) {
			if(problem) *problem = "checksum mismatch for " + e.path;
			return false;
		}
	}
	return true;
}

std::string manifest_json(const RunManifest& m)
{
	using nlohmann::ordered_json;
	ordered_json j;
	auto c = to_atomic_units(m.config);
	j["tool_version"] = m.tool_version;
	j["started"] = m.started;
	j["finished"] = m.finished;
	j["config"] = {
		{"units", "a.u."},
		{"text", serialize_config(c)},
		{"hash", config_hash(c)},
		{"case", to_string(c.fields.case_tag)},
		{"e_phi0", c.fields.e_phi0},
		{"e_A0", c.fields.e_A0},
		{"W_v", c.fields.W_v},
		{"W_a", c.fields.W_a},
		{"x_B", c.fields.x_B},
		{"L", c.fields.L},
		{"n_points", c.grid.n_points},
		{"box_length", c.grid.box_length},
		{"t_max", c.run.t_max},
	};
	ordered_json outs = ordered_json::array();
	for(const auto& e : m.outputs) {
		char crc[16];
		std::snprintf(crc, sizeof crc, "%08x", e.crc32);
		outs.push_back({{"path", e.path}, {"crc32", crc}, {"bytes", e.bytes}});
	}
	j["outputs"] = outs;
	ordered_json t = ordered_json::object();
	for(const auto& [k, v] : m.timings) t[k] = v;
	j["timings_s"] = t;
	return j.dump(2) + "\n";
}

} // namespace klein
