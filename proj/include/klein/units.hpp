#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace klein {

struct PhysicalConstants
{
	static constexpr double c = 137.036;
	static constexpr double lambda_c = 1.0 / c;
	// natural-unit scale factors expressed in atomic units
	static constexpr double energy_unit = c * c;
	static constexpr double momentum_unit = c;
	static constexpr double length_unit = lambda_c;
	static constexpr double time_unit = 1.0 / (c * c);
};

enum class UnitSystem { atomic, natural };
enum class CaseTag { I, II, III };
enum class ProfileKind { tanh, sharp_step };

std::string to_string(CaseTag c);
CaseTag parse_case(const std::string& s);
std::string to_string(ProfileKind p);
ProfileKind parse_profile_kind(const std::string& s);

class ConfigError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

struct FieldConfiguration
{
	CaseTag case_tag = CaseTag::I;
	double e_phi0 = 0.0;
	double e_A0 = 0.0;
	double W_v = 0.0;
	double W_a = 0.0;
	double x_B = 0.0;
	double L = 0.0;
	ProfileKind profile_kind = ProfileKind::tanh;
	UnitSystem units = UnitSystem::atomic;

	// momentum shift across the vector step, in the unit system of the struct
	double delta() const;
	bool operator==(const FieldConfiguration&) const = default;
};

struct Grid1D
{
	std::int64_t n_points = 1024;
	double box_length = 0.0;
	// width of the ramp that closes the potentials periodically at the box edge
	double closure_width = 0.0;
	UnitSystem units = UnitSystem::atomic;

	double dx() const { return box_length / static_cast<double>(n_points); }
	double position(std::int64_t j) const;
	// lattice momentum of FFT index j (symmetric range, Nyquist negative)
	double momentum(std::int64_t j) const;
	std::vector<double> positions() const;
	std::vector<double> momenta() const;
	double cutoff() const;
	bool operator==(const Grid1D&) const = default;
};

struct Channel
{
	double p_parallel = 0.0;
	int spin = 1; // +1 or -1 for spin +1/2 / -1/2
	bool operator==(const Channel&) const = default;
};

enum class Backend { eigen, split_operator };

struct RunControls
{
	double t_max = 0.0;
	double t_step = 0.0;    // observable sampling interval
	double spectrum_step = 0.0; // interval of stored momentum spectra, a multiple of t_step
	double dt = 0.0;        // split-operator step
	double transient = 0.0; // excluded from rate fits
	Backend backend = Backend::eigen;
	double p_parallel = 0.0;
	int spin = 1;
	UnitSystem units = UnitSystem::atomic;
	bool operator==(const RunControls&) const = default;
};

struct SweepControls
{
	std::vector<CaseTag> cases;
	double p_min = 0.0;
	double p_max = 0.0;
	std::int64_t p_count = 0;
	int workers = 1;
	UnitSystem units = UnitSystem::atomic;
	bool operator==(const SweepControls&) const = default;
};

struct Config
{
	FieldConfiguration fields;
	Grid1D grid;
	RunControls run;
	SweepControls sweep;
	bool operator==(const Config&) const = default;
};

FieldConfiguration to_natural_units(const FieldConfiguration& f);
FieldConfiguration to_atomic_units(const FieldConfiguration& f);
Grid1D to_natural_units(const Grid1D& g);
Grid1D to_atomic_units(const Grid1D& g);
RunControls to_natural_units(const RunControls& r);
RunControls to_atomic_units(const RunControls& r);
SweepControls to_natural_units(const SweepControls& s);
SweepControls to_atomic_units(const SweepControls& s);
Config to_natural_units(const Config& c);
Config to_atomic_units(const Config& c);
double time_to_natural(double t_au);
double time_to_atomic(double t_nat);

// Parses a numeric literal with an optional unit suffix (c^2, c2, c, lambda_c, tau_c).
double parse_quantity(const std::string& text);

Config parse_config(const std::string& text);
std::string serialize_config(const Config& c);
void validate(const Config& c);
void validate(const FieldConfiguration& f);
// Grid checks that depend on the physics: cutoff and wrap-around distance (natural units).
void validate_grid(const Grid1D& g_nat, const FieldConfiguration& f_nat, double t_max_nat);

// Largest perpendicular momentum inside any Klein window of the configuration.
double max_klein_momentum(const FieldConfiguration& f_nat);

// Real-line profiles (e*phi, e*A_y) in the unit system of f.
std::pair<double, double> field_profiles(const FieldConfiguration& f, double x);

// Profiles sampled on the periodic grid with the closure ramp (natural units).
struct GridPotentials
{
	std::vector<double> v;
	std::vector<double> a;
};
GridPotentials grid_potentials(const Grid1D& g_nat, const FieldConfiguration& f_nat);

std::string config_hash(const Config& c);

struct ManifestEntry
{
	std::string path;
	std::uint32_t crc32 = 0;
	std::uint64_t bytes = 0;
};

struct RunManifest
{
	Config config;
	std::string tool_version;
	std::string started;
	std::string finished;
	std::vector<ManifestEntry> outputs;
	std::map<std::string, double> timings;
};

std::string tool_version();
std::string utc_timestamp();
std::string manifest_json(const RunManifest& m);
ManifestEntry manifest_entry(const std::string& path);
// Verifies that every listed output exists and matches its checksum.
bool verify_manifest(const RunManifest& m, std::string* problem = nullptr);

} // namespace klein
