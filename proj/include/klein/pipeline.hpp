#pragma once

#include "klein/observables.hpp"
#include "klein/units.hpp"

#include <optional>
#include <vector>

namespace klein {

// Copy of the configuration with the fields rearranged for another case tag
// (Case I drops the vector step, Case II/III place it at +L/-L).
Config with_case(const Config& c, CaseTag tag);

std::vector<double> sample_times(double t_max, double t_step);

// Positions of the spectrum times within the sample times; throws when one is missing.
std::vector<std::size_t> subset_positions(const std::vector<double>& times, const std::vector<double>& subset);

struct ChannelOptions
{
	std::vector<double> times;          // natural units, increasing, starting at 0
	std::vector<double> spectrum_times; // subset of times; empty means all of them
	Backend backend = Backend::eigen;
	double dt = 0.02;                  // split-operator step (natural)
	std::vector<double> density_times; // spatial densities to record (eigen backend)
};

struct ChannelResult
{
	CaseTag case_tag = CaseTag::I;
	double p_parallel = 0.0; // natural
	int spin = 1;
	Grid1D grid;             // natural
	std::vector<double> times;
	std::vector<double> number;
	std::vector<double> spectrum_times;
	std::vector<double> k;   // ascending lattice momentum
	Eigen::MatrixXd rho_k;   // rows: spectrum_times, columns: ascending k
	std::vector<SpatialDensity> densities;
	double seconds = 0.0;

	std::vector<double> rho_row(std::size_t i) const;
};

ChannelResult run_channel(const Config& cfg, CaseTag tag, double p_parallel_nat, int spin, const ChannelOptions& opt);

} // namespace klein
