#pragma once

#include "klein/dirac.hpp"

#include <optional>
#include <vector>

namespace klein {

enum class SpectralNormalization {
	per_mode, // rho(E) = rho_k * dk/dE, rho_k the count in one lattice mode
	landauer, // counts per unit energy in the box, dN/dE
	hund      // 4 dN/dE, the normalization in which rho = (2t/pi) T holds literally
};

std::string to_string(SpectralNormalization n);
SpectralNormalization parse_normalization(const std::string& s);

// Particle reference: positive/negative single-particle states in position representation.
struct ReferenceBasis
{
	Eigen::MatrixXcd positive; // 2N x N
	Eigen::MatrixXcd negative; // 2N x N
	// <k | p_ref>: free positive plane waves against reference positive states (N x N);
	// absent when the reference is the free basis itself.
	std::optional<Eigen::MatrixXcd> free_overlap;
	std::vector<double> k; // lattice momentum of the free positive states (FFT order)
	bool dressed = false;
};

ReferenceBasis free_reference(const FreeBasis& b);
// Eigenbasis of the vector-potential-only Hamiltonian; used when the vector step is present.
ReferenceBasis dressed_reference(const Hamiltonian& H, const FreeBasis& b);
ReferenceBasis reference_for(const Hamiltonian& H, const FreeBasis& b);

struct BogoliubovAmplitudes
{
	Eigen::MatrixXcd G; // rows: positive reference states, columns: negative reference states
	double t = 0.0;
	Channel channel;
};

// Precomputed overlaps so that each time needs one dense product.
class BogoliubovEngine
{
public:
	BogoliubovEngine(const HamiltonianSpectrum& spectrum, const ReferenceBasis& ref, Channel channel);

	BogoliubovAmplitudes amplitudes(double t) const;          // <p|U(t)|n>
	Eigen::MatrixXcd negative_block(double t) const;          // <n'|U(t)|n>
	Eigen::MatrixXcd positron_block(double t) const;          // <n|U(t)|p>
	const ReferenceBasis& reference() const { return ref_; }
	// N(t) = sum_{m,m'} M_mm' exp(-i(E_m - E_m')t) with M built once; O(N^2) per sample instead of a dense product.
	std::vector<double> number_series(const std::vector<double>& times) const;

private:
	Eigen::MatrixXcd product(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right, double t) const;
	ReferenceBasis ref_;
	Channel channel_;
	Eigen::VectorXd energies_;
	Eigen::MatrixXcd pos_w_; // R+^dag W
	Eigen::MatrixXcd neg_w_; // R-^dag W
};

// G from explicit propagation of each negative reference state (split-operator backend).
BogoliubovAmplitudes bogoliubov_split(const Hamiltonian& H, const ReferenceBasis& ref, double dt, std::int64_t n_steps);

double particle_number(const BogoliubovAmplitudes& G);
double particle_number(const Eigen::MatrixXcd& G);
// Unitarity sum rule: max_n |sum_p |G_pn|^2 + sum_n' |C_n'n|^2 - 1|
double completeness_residual(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& C);
double max_column_weight(const Eigen::MatrixXcd& G);

// Row sums of |G|^2 in the free plane-wave basis, FFT order.
std::vector<double> momentum_spectrum(const BogoliubovAmplitudes& G, const ReferenceBasis& ref);

struct EnergySpectrum
{
	std::vector<double> energy;      // ascending, one per |k|
	std::vector<double> negative_k;  // branch with k < 0 (electrons moving to -x)
	std::vector<double> positive_k;  // branch with k > 0
	std::vector<double> total;
	SpectralNormalization normalization = SpectralNormalization::per_mode;
};

EnergySpectrum energy_spectrum(const std::vector<double>& rho_k, const std::vector<double>& k, double p_parallel,
                               double box_length, SpectralNormalization norm);

enum class Branch { negative_k, positive_k, both };

// Histogram of rho_k into energy bins, reported as a density per unit energy in the chosen normalization.
std::vector<double> binned_energy_spectrum(const std::vector<double>& rho_k, const std::vector<double>& k,
                                           double p_parallel, double box_length, const std::vector<double>& edges,
                                           Branch branch, SpectralNormalization norm);

struct SpatialDensity
{
	std::vector<double> x;
	std::vector<double> electron;
	std::vector<double> positron;
	double t = 0.0;
};
SpatialDensity spatial_density(const BogoliubovEngine& engine, const Grid1D& grid_nat, double t);
double center_of_mass(const std::vector<double>& x, const std::vector<double>& rho);

struct Emd2D
{
	std::vector<double> p_parallel;
	std::vector<double> p_perp;
	Eigen::MatrixXd values; // rows p_parallel, columns p_perp
	Emd2D normalized() const;
	// index of the row with the largest row sum
	Eigen::Index most_probable_row() const;
};
struct EmdRow
{
	double p_parallel;
	std::vector<double> p_perp; // ascending
	std::vector<double> rho;
};
Emd2D assemble_emd2d(std::vector<EmdRow> rows);

struct RateFit
{
	double rate = 0.0;
	double rate_error = 0.0;
	double intercept = 0.0;
	double residual = 0.0; // rms residual relative to the fitted range of N
	std::size_t samples = 0;
};
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& N, double t_lo, double t_hi);

double fringe_contrast(const std::vector<double>& energy, const std::vector<double>& rho, double lo, double hi);

struct Support
{
	bool empty = true;
	std::size_t first = 0, last = 0; // inclusive bin indices
	std::vector<bool> mask;
};
Support support_of(const std::vector<double>& values, double fraction);

struct TimeResolvedSpectrum
{
	std::vector<double> times;
	std::vector<double> edges;
	std::vector<std::vector<double>> rho; // one row per time
};

TimeResolvedSpectrum time_resolved_spectrum(const std::vector<double>& times,
                                            const std::vector<std::vector<double>>& rho_k_by_time,
                                            const std::vector<double>& k, double p_parallel, double box_length,
                                            const std::vector<double>& edges, Branch branch,
                                            SpectralNormalization norm);
// rho(t) - rho(t_ref) for every row; the production spectrum after the turn-on transient.
TimeResolvedSpectrum production_spectrum(const TimeResolvedSpectrum& s, double t_ref);

std::vector<double> uniform_edges(double lo, double hi, double width);

} // namespace klein
