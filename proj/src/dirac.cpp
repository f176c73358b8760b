#include "klein/dirac.hpp"

#include <fftw3.h>

#include <complex>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

extern "C" void openblas_set_num_threads(int);

namespace klein {

namespace {

std::mutex& planner_mutex()
{
	static std::mutex m;
	return m;
}

} // namespace

void pin_blas_threads()
{
	static std::once_flag once;
	std::call_once(once, [] { openblas_set_num_threads(1); });
}

Fft::Fft(std::int64_t n) : n_(n)
{
	std::lock_guard lock(planner_mutex());
	auto* a = fftw_alloc_complex(n);
	auto* b = fftw_alloc_complex(n);
	fwd_ = fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
	bwd_ = fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
	fftw_free(a);
	fftw_free(b);
}

Fft::~Fft()
{
	std::lock_guard lock(planner_mutex());
	fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
	fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(const cplx* in, cplx* out) const
{
	fftw_execute_dft(static_cast<fftw_plan>(fwd_), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
	                 reinterpret_cast<fftw_complex*>(out));
}

void Fft::backward(const cplx* in, cplx* out) const
{
	fftw_execute_dft(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
	                 reinterpret_cast<fftw_complex*>(out));
}

FreeBasis build_free_basis(const Grid1D& g, const Channel& ch)
{
	FreeBasis b;
	b.grid = g;
	b.channel = ch;
	const auto n = g.n_points;
	b.k = g.momenta();
	b.energy.resize(n);
	b.pos_up.resize(n);
	b.pos_lo.resize(n);
	b.neg_up.resize(n);
	b.neg_lo.resize(n);
	const double p = ch.p_parallel;
	for(std::int64_t j = 0; j < n; ++j) {
		const double k = b.k[j];
		const double E = std::sqrt(1 + k * k + p * p);
		const double nrm = std::sqrt((E + 1) / (2 * E));
		b.energy[j] = E;
		b.pos_up[j] = nrm;
		b.pos_lo[j] = nrm * cplx(k, p) / (E + 1);
		b.neg_up[j] = -nrm * cplx(k, -p) / (E + 1);
		b.neg_lo[j] = nrm;
	}
	return b;
}

namespace {

Eigen::MatrixXcd states(const FreeBasis& b, const std::vector<cplx>& up, const std::vector<cplx>& lo)
{
	const auto n = b.size();
	Eigen::MatrixXcd S(2 * n, n);
	const double s = 1.0 / std::sqrt(static_cast<double>(n));
	for(std::int64_t m = 0; m < n; ++m) {
		for(std::int64_t j = 0; j < n; ++j) {
			cplx ph = std::polar(s, b.k[m] * b.grid.position(j));
			S(j, m) = up[m] * ph;
			S(n + j, m) = lo[m] * ph;
		}
	}
	return S;
}

} // namespace

Eigen::MatrixXcd FreeBasis::positive_states() const { return states(*this, pos_up, pos_lo); }
Eigen::MatrixXcd FreeBasis::negative_states() const { return states(*this, neg_up, neg_lo); }

std::vector<std::int64_t> FreeBasis::ascending_order() const
{
	std::vector<std::int64_t> idx(size());
	std::iota(idx.begin(), idx.end(), 0);
	std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return k[a] < k[b]; });
	return idx;
}

Hamiltonian::Hamiltonian(Grid1D grid, Channel channel, GridPotentials pot)
	: grid_(std::move(grid)), channel_(channel), v_(std::move(pot.v)), a_(std::move(pot.a)), k_(grid_.momenta()),
	  fft_(std::make_shared<Fft>(grid_.n_points))
{
	if(static_cast<std::int64_t>(v_.size()) != grid_.n_points || static_cast<std::int64_t>(a_.size()) != grid_.n_points)
		throw std::invalid_argument("Hamiltonian: potential size does not match the grid");
}

Hamiltonian build_hamiltonian(const Grid1D& g, const Channel& ch, const FieldConfiguration& f)
{
	auto gn = to_natural_units(g);
	auto fn = to_natural_units(f);
	double pmax = max_klein_momentum(fn);
	if(gn.cutoff() < 5 * pmax)
		throw ConfigError("grid.n_points: momentum cutoff " + std::to_string(gn.cutoff()) +
		                  " below 5x the largest Klein momentum " + std::to_string(pmax));
	return Hamiltonian(gn, ch, grid_potentials(gn, fn));
}

Hamiltonian Hamiltonian::vector_only() const
{
	GridPotentials p{std::vector<double>(v_.size(), 0.0), a_};
	return Hamiltonian(grid_, channel_, std::move(p));
}

double Hamiltonian::energy_scale() const
{
	double kmax = 0, amax = 0, vmax = 0;
	for(double k : k_) kmax = std::max(kmax, std::abs(k));
	for(double a : a_) amax = std::max(amax, std::abs(channel_.p_parallel - a));
	for(double v : v_) vmax = std::max(vmax, std::abs(v));
	return std::sqrt(1 + kmax * kmax + amax * amax) + vmax;
}

Eigen::MatrixXcd Hamiltonian::dense() const
{
	const auto n = grid_.n_points;
	// circulant kernel of the spectral derivative
	std::vector<cplx> kk(k_.begin(), k_.end()), c(n);
	fft_->backward(kk.data(), c.data());
	for(auto& x : c) x /= static_cast<double>(n);
	Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
	for(std::int64_t j = 0; j < n; ++j) {
		for(std::int64_t l = 0; l < n; ++l) {
			cplx K = c[((j - l) % n + n) % n];
			H(j, n + l) = K;
			H(n + j, l) = K;
		}
		const double P = channel_.p_parallel - a_[j];
		H(j, j) = 1 + v_[j];
		H(n + j, n + j) = -1 + v_[j];
		H(j, n + j) += cplx(0, -P);
		H(n + j, j) += cplx(0, P);
	}
	return H;
}

SpinorField Hamiltonian::apply(const SpinorField& psi) const
{
	const auto n = grid_.n_points;
	if(psi.size() != 2 * n) throw std::invalid_argument("Hamiltonian::apply: size mismatch");
	std::vector<cplx> buf(n), up(n), lo(n);
	auto kin = [&](const cplx* in, std::vector<cplx>& out) {
		fft_->forward(in, buf.data());
		for(std::int64_t m = 0; m < n; ++m) buf[m] *= k_[m] / static_cast<double>(n);
		fft_->backward(buf.data(), out.data());
	};
	kin(psi.data(), up); // K psi_upper
	kin(psi.data() + n, lo);
	SpinorField out(2 * n);
	for(std::int64_t j = 0; j < n; ++j) {
		const double P = channel_.p_parallel - a_[j];
		const cplx u = psi(j), d = psi(n + j);
		out(j) = (1 + v_[j]) * u + lo[j] + cplx(0, -P) * d;
		out(n + j) = up[j] + cplx(0, P) * u + (-1 + v_[j]) * d;
	}
	return out;
}

Continua static_continua(const FieldConfiguration& f, const Channel& ch, const std::vector<double>& xs)
{
	auto fn = to_natural_units(f);
	Continua c;
	c.upper.resize(xs.size());
	c.lower.resize(xs.size());
	for(std::size_t i = 0; i < xs.size(); ++i) {
		auto [v, a] = field_profiles(fn, xs[i]);
		const double P = ch.p_parallel - a;
		const double gap = std::sqrt(1 + P * P);
		c.upper[i] = v + gap;
		c.lower[i] = v - gap;
	}
	return c;
}

double hermiticity_residual(const Eigen::MatrixXcd& H) { return (H - H.adjoint()).cwiseAbs().maxCoeff(); }

HamiltonianSpectrum diagonalize(const Eigen::MatrixXcd& H, const std::string& label)
{
	pin_blas_threads();
	if(H.rows() != H.cols()) throw std::invalid_argument("diagonalize: matrix not square");
	double herm = hermiticity_residual(H);
	if(herm > 1e-12) throw NumericalError("diagonalize: Hermiticity residual " + std::to_string(herm) + " " + label);
	HamiltonianSpectrum s;
	s.vectors = H;
	s.energies.resize(H.rows());
	const auto n = static_cast<lapack_int>(H.rows());
	lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, s.vectors.data(), n, s.energies.data());
	if(info != 0) throw NumericalError("diagonalize: zheevd failed (info " + std::to_string(info) + ") " + label);
	return s;
}

double reconstruction_residual(const Eigen::MatrixXcd& H, const HamiltonianSpectrum& s)
{
	Eigen::MatrixXcd R = H * s.vectors - s.vectors * s.energies.asDiagonal();
	double norm = std::max(std::abs(s.energies(0)), std::abs(s.energies(s.energies.size() - 1)));
	return R.colwise().norm().maxCoeff() / norm;
}

double gram_residual(const Eigen::MatrixXcd& V)
{
	Eigen::MatrixXcd G = V.adjoint() * V;
	G.diagonal().array() -= 1.0;
	return G.cwiseAbs().maxCoeff();
}

SpinorField evolve_eigen(const HamiltonianSpectrum& s, const SpinorField& psi, double t)
{
	if(t < 0) throw std::invalid_argument("evolve_eigen: negative time");
	Eigen::VectorXcd c = s.vectors.adjoint() * psi;
	for(Eigen::Index m = 0; m < c.size(); ++m) c(m) *= std::polar(1.0, -s.energies(m) * t);
	return s.vectors * c;
}

SpinorField evolve_split_operator(const Hamiltonian& H, const SpinorField& psi, double dt, std::int64_t n_steps)
{
	const auto n = H.grid().n_points;
	if(psi.size() != 2 * n) throw std::invalid_argument("evolve_split_operator: size mismatch");
	if(!(dt > 0) || dt * H.energy_scale() > 0.5)
		throw std::invalid_argument("evolve_split_operator: step dt=" + std::to_string(dt) +
		                            " violates dt*|E|max <= 0.5 (|E|max=" + std::to_string(H.energy_scale()) + ")");
	const double p = H.channel().p_parallel;
	const double tau = dt / 2;
	// position factor: exp(-i tau (v - sigma_2 a)) = e^{-i v tau} (cos(a tau) + i sin(a tau) sigma_2)
	std::vector<cplx> ph(n), cs(n), sn(n);
	for(std::int64_t j = 0; j < n; ++j) {
		ph[j] = std::polar(1.0, -H.v()[j] * tau);
		cs[j] = std::cos(H.a()[j] * tau);
		sn[j] = std::sin(H.a()[j] * tau);
	}
	// momentum factor: exp(-i dt H0(k)) = cos(E dt) - i sin(E dt) H0(k)/E
	std::vector<cplx> m11(n), m12(n), m21(n), m22(n);
	for(std::int64_t m = 0; m < n; ++m) {
		const double k = H.k()[m];
		const double E = std::sqrt(1 + k * k + p * p);
		const double c = std::cos(E * dt), s = std::sin(E * dt) / E;
		const cplx mi(0, -1);
		m11[m] = c + mi * s * 1.0;
		m22[m] = c + mi * s * -1.0;
		m12[m] = mi * s * cplx(k, -p);
		m21[m] = mi * s * cplx(k, p);
	}
	Fft fft(n);
	std::vector<cplx> up(psi.data(), psi.data() + n), lo(psi.data() + n, psi.data() + 2 * n);
	std::vector<cplx> fu(n), fl(n);
	auto half_potential = [&] {
		for(std::int64_t j = 0; j < n; ++j) {
			// sigma_2 = [[0,-i],[i,0]]; i sin * sigma_2 = [[0, sin],[-sin, 0]]
			const cplx u = up[j], d = lo[j];
			up[j] = ph[j] * (cs[j] * u + sn[j] * d);
			lo[j] = ph[j] * (-sn[j] * u + cs[j] * d);
		}
	};
	const double inv = 1.0 / static_cast<double>(n);
	for(std::int64_t step = 0; step < n_steps; ++step) {
		half_potential();
		fft.forward(up.data(), fu.data());
		fft.forward(lo.data(), fl.data());
		for(std::int64_t m = 0; m < n; ++m) {
			const cplx u = fu[m], d = fl[m];
			fu[m] = (m11[m] * u + m12[m] * d) * inv;
			fl[m] = (m21[m] * u + m22[m] * d) * inv;
		}
		fft.backward(fu.data(), up.data());
		fft.backward(fl.data(), lo.data());
		half_potential();
	}
	SpinorField out(2 * n);
	for(std::int64_t j = 0; j < n; ++j) {
		out(j) = up[j];
		out(n + j) = lo[j];
	}
	return out;
}

} // namespace klein
