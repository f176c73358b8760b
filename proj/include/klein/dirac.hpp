#pragma once

#include "klein/units.hpp"

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

namespace klein {

using cplx = std::complex<double>;
// Two-component spinor on the grid: entries [0, N) upper component, [N, 2N) lower component.
using SpinorField = Eigen::VectorXcd;

class NumericalError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

// Pins the BLAS/LAPACK backend to one thread so results do not depend on scheduling.
void pin_blas_threads();

// Unitary DFT on the grid (FFTW); forward maps position samples to plane-wave amplitudes.
class Fft
{
public:
	explicit Fft(std::int64_t n);
	~Fft();
	Fft(const Fft&) = delete;
	Fft& operator=(const Fft&) = delete;
	void forward(const cplx* in, cplx* out) const;  // sum_j x_j e^{-2 pi i j m / N}
	void backward(const cplx* in, cplx* out) const; // sum_m y_m e^{+2 pi i j m / N}
	std::int64_t size() const { return n_; }

private:
	std::int64_t n_;
	void* fwd_;
	void* bwd_;
};

struct FreeBasis
{
	Grid1D grid;
	Channel channel;
	std::vector<double> k;      // lattice momentum per FFT index
	std::vector<double> energy; // positive branch energy
	// spinor components in momentum space
	std::vector<cplx> pos_up, pos_lo, neg_up, neg_lo;

	std::int64_t size() const { return grid.n_points; }
	// Position representation of the states, one column per lattice momentum (2N x N).
	Eigen::MatrixXcd positive_states() const;
	Eigen::MatrixXcd negative_states() const;
	// FFT indices sorted by ascending momentum
	std::vector<std::int64_t> ascending_order() const;
};

FreeBasis build_free_basis(const Grid1D& grid_nat, const Channel& channel);

class Hamiltonian
{
public:
	Hamiltonian(Grid1D grid_nat, Channel channel, GridPotentials pot);

	const Grid1D& grid() const { return grid_; }
	const Channel& channel() const { return channel_; }
	const std::vector<double>& v() const { return v_; }
	const std::vector<double>& a() const { return a_; }
	const std::vector<double>& k() const { return k_; }
	std::int64_t dim() const { return 2 * grid_.n_points; }

	Eigen::MatrixXcd dense() const;
	SpinorField apply(const SpinorField& psi) const;
	// Same geometry with the scalar potential removed.
	Hamiltonian vector_only() const;
	// Upper bound on |E| over the grid.
	double energy_scale() const;

private:
	Grid1D grid_;
	Channel channel_;
	std::vector<double> v_, a_, k_;
	std::shared_ptr<const Fft> fft_;
};

Hamiltonian build_hamiltonian(const Grid1D& grid_nat, const Channel& channel, const FieldConfiguration& fields_nat);

struct Continua
{
	std::vector<double> upper; // E_+(x)
	std::vector<double> lower; // E_-(x)
};
Continua static_continua(const FieldConfiguration& fields_nat, const Channel& channel, const std::vector<double>& xs);

struct HamiltonianSpectrum
{
	Eigen::VectorXd energies; // ascending
	Eigen::MatrixXcd vectors; // columns
};

double hermiticity_residual(const Eigen::MatrixXcd& H);
HamiltonianSpectrum diagonalize(const Eigen::MatrixXcd& H, const std::string& label = "");
// max_m ||H v_m - E_m v_m|| / ||H||_2 estimate
double reconstruction_residual(const Eigen::MatrixXcd& H, const HamiltonianSpectrum& s);
double gram_residual(const Eigen::MatrixXcd& V);

SpinorField evolve_eigen(const HamiltonianSpectrum& s, const SpinorField& psi, double t);
SpinorField evolve_split_operator(const Hamiltonian& H, const SpinorField& psi, double dt, std::int64_t n_steps);

} // namespace klein
