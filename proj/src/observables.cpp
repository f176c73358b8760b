#include "klein/observables.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace klein {

std::string to_string(SpectralNormalization n)
{
	switch(n) {
	case SpectralNormalization::per_mode: return "per_mode";
	case SpectralNormalization::landauer: return "landauer";
	case SpectralNormalization::hund: return "hund";
	}
	return "?";
}

SpectralNormalization parse_normalization(const std::string& s)
{
	if(s == "per_mode" || s == "per-mode") return SpectralNormalization::per_mode;
	if(s == "landauer") return SpectralNormalization::landauer;
	if(s == "hund") return SpectralNormalization::hund;
	throw std::invalid_argument("unknown spectral normalization '" + s + "'");
}

ReferenceBasis free_reference(const FreeBasis& b)
{
	ReferenceBasis r;
	r.positive = b.positive_states();
	r.negative = b.negative_states();
	r.k = b.k;
	return r;
}

ReferenceBasis dressed_reference(const Hamiltonian& H, const FreeBasis& b)
{
	const auto n = H.grid().n_points;
	auto HA = H.vector_only();
	auto spec = diagonalize(HA.dense(), "vector-only reference");
	if(!(spec.energies(n - 1) < 0 && spec.energies(n) > 0))
		throw NumericalError("dressed_reference: vector-only spectrum is not gapped at zero");
	ReferenceBasis r;
	r.negative = spec.vectors.leftCols(n);
	r.positive = spec.vectors.rightCols(n);
	r.free_overlap = b.positive_states().adjoint() * r.positive;
	r.k = b.k;
	r.dressed = true;
	return r;
}

ReferenceBasis reference_for(const Hamiltonian& H, const FreeBasis& b)
{
	bool vector_step = std::any_of(H.a().begin(), H.a().end(), [](double a) { return a != 0.0; });
	return vector_step ? dressed_reference(H, b) : free_reference(b);
}

BogoliubovEngine::BogoliubovEngine(const HamiltonianSpectrum& spectrum, const ReferenceBasis& ref, Channel channel)
	: ref_(ref), channel_(channel), energies_(spectrum.energies)
{
	pin_blas_threads();
	if(ref.positive.rows() != spectrum.vectors.rows())
		throw std::invalid_argument("BogoliubovEngine: reference basis and spectrum have different grids");
	pos_w_ = ref.positive.adjoint() * spectrum.vectors;
	neg_w_ = ref.negative.adjoint() * spectrum.vectors;
}

Eigen::MatrixXcd BogoliubovEngine::product(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right, double t) const
{
	Eigen::VectorXcd phase(energies_.size());
	for(Eigen::Index m = 0; m < energies_.size(); ++m) phase(m) = std::polar(1.0, -energies_(m) * t);
	Eigen::MatrixXcd scaled = left * phase.asDiagonal();
	Eigen::MatrixXcd out = scaled * right.adjoint();
	return out;
}

BogoliubovAmplitudes BogoliubovEngine::amplitudes(double t) const
{
	BogoliubovAmplitudes g;
	g.t = t;
	g.channel = channel_;
	if(t == 0.0) {
		// <p|n> = 0 by construction of the reference basis
		g.G = Eigen::MatrixXcd::Zero(pos_w_.rows(), neg_w_.rows());
		return g;
	}
	g.G = product(pos_w_, neg_w_, t);
	return g;
}

std::vector<double> BogoliubovEngine::number_series(const std::vector<double>& times) const
{
	// G = A Phi B^dag, so sum |G|^2 = sum_{m,m'} phi_m conj(phi_m') conj((A^dag A)_mm') (B^dag B)_mm'
	Eigen::MatrixXcd M = (pos_w_.adjoint() * pos_w_).conjugate();
	M.array() *= (neg_w_.adjoint() * neg_w_).array();
	std::vector<double> out;
	out.reserve(times.size());
	Eigen::VectorXcd phase(energies_.size());
	for(double t : times) {
		if(t == 0.0) {
			out.push_back(0.0);
			continue;
		}
		for(Eigen::Index m = 0; m < energies_.size(); ++m) phase(m) = std::polar(1.0, -energies_(m) * t);
		cplx n = phase.transpose() * (M * phase.conjugate());
		out.push_back(n.real());
	}
	return out;
}

Eigen::MatrixXcd BogoliubovEngine::negative_block(double t) const { return product(neg_w_, neg_w_, t); }
Eigen::MatrixXcd BogoliubovEngine::positron_block(double t) const { return product(neg_w_, pos_w_, t); }

BogoliubovAmplitudes bogoliubov_split(const Hamiltonian& H, const ReferenceBasis& ref, double dt, std::int64_t n_steps)
{
	const auto n = ref.negative.cols();
	Eigen::MatrixXcd psi(ref.negative.rows(), n);
	for(Eigen::Index c = 0; c < n; ++c) psi.col(c) = evolve_split_operator(H, ref.negative.col(c), dt, n_steps);
	BogoliubovAmplitudes g;
	g.t = dt * static_cast<double>(n_steps);
	g.channel = H.channel();
	g.G = ref.positive.adjoint() * psi;
	return g;
}

double particle_number(const Eigen::MatrixXcd& G) { return G.cwiseAbs2().sum(); }
double particle_number(const BogoliubovAmplitudes& G) { return particle_number(G.G); }

double completeness_residual(const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& C)
{
	Eigen::VectorXd s = G.cwiseAbs2().colwise().sum().transpose() + C.cwiseAbs2().colwise().sum().transpose();
	return (s.array() - 1.0).abs().maxCoeff();
}

double max_column_weight(const Eigen::MatrixXcd& G) { return G.cwiseAbs2().colwise().sum().maxCoeff(); }

std::vector<double> momentum_spectrum(const BogoliubovAmplitudes& G, const ReferenceBasis& ref)
{
	Eigen::VectorXd rows;
	if(ref.free_overlap) {
		Eigen::MatrixXcd M = (*ref.free_overlap) * G.G;
		rows = M.cwiseAbs2().rowwise().sum();
	} else {
		rows = G.G.cwiseAbs2().rowwise().sum();
	}
	return {rows.data(), rows.data() + rows.size()};
}

namespace {

double norm_factor(SpectralNormalization n, double dk)
{
	switch(n) {
	case SpectralNormalization::per_mode: return 1.0;
	case SpectralNormalization::landauer: return 1.0 / dk;
	case SpectralNormalization::hund: return 4.0 / dk;
	}
	return 1.0;
}

} // namespace

EnergySpectrum energy_spectrum(const std::vector<double>& rho_k, const std::vector<double>& k, double p,
                               double box_length, SpectralNormalization norm)
{
	const std::size_t n = k.size();
	if(rho_k.size() != n) throw std::invalid_argument("energy_spectrum: size mismatch");
	const double dk = 2 * std::numbers::pi / box_length;
	const std::size_t half = n / 2;
	EnergySpectrum s;
	s.normalization = norm;
	s.energy.resize(half + 1);
	s.negative_k.assign(half + 1, 0.0);
	s.positive_k.assign(half + 1, 0.0);
	const double f = norm_factor(norm, dk);
	auto energy = [&](double kk) { return std::sqrt(1 + kk * kk + p * p); };
	for(std::size_t j = 0; j <= half; ++j) s.energy[j] = energy(dk * static_cast<double>(j));
	for(std::size_t m = 0; m < n; ++m) {
		const double kk = k[m];
		const auto j = static_cast<std::size_t>(std::llround(std::abs(kk) / dk));
		if(j > half) throw std::invalid_argument("energy_spectrum: momentum outside lattice");
		if(j == 0) {
			// one-sided difference for dE/dk at k = 0
			const double jac = dk / (energy(dk) - energy(0));
			s.negative_k[0] += 0.5 * rho_k[m] * jac * f;
			s.positive_k[0] += 0.5 * rho_k[m] * jac * f;
			continue;
		}
		const double jac = s.energy[j] / std::abs(kk);
		(kk < 0 ? s.negative_k : s.positive_k)[j] += rho_k[m] * jac * f;
	}
	s.total.resize(half + 1);
	for(std::size_t j = 0; j <= half; ++j) s.total[j] = s.negative_k[j] + s.positive_k[j];
	return s;
}

std::vector<double> binned_energy_spectrum(const std::vector<double>& rho_k, const std::vector<double>& k, double p,
                                           double box_length, const std::vector<double>& edges, Branch branch,
                                           SpectralNormalization norm)
{
	if(edges.size() < 2) throw std::invalid_argument("binned_energy_spectrum: need at least two edges");
	const double dk = 2 * std::numbers::pi / box_length;
	std::vector<double> out(edges.size() - 1, 0.0);
	for(std::size_t m = 0; m < k.size(); ++m) {
		double w = rho_k[m];
		if(k[m] == 0.0) {
			if(branch != Branch::both) w *= 0.5;
		} else if((branch == Branch::negative_k && k[m] > 0) || (branch == Branch::positive_k && k[m] < 0)) {
			continue;
		}
		const double E = std::sqrt(1 + k[m] * k[m] + p * p);
		auto it = std::upper_bound(edges.begin(), edges.end(), E);
		if(it == edges.begin() || it == edges.end()) continue;
		out[static_cast<std::size_t>(it - edges.begin()) - 1] += w;
	}
	// counts per unit energy; per_mode rescales by the mode spacing
	const double scale = norm_factor(norm, dk) * dk;
	for(std::size_t b = 0; b < out.size(); ++b) out[b] *= scale / (edges[b + 1] - edges[b]);
	return out;
}

SpatialDensity spatial_density(const BogoliubovEngine& engine, const Grid1D& g, double t)
{
	const auto n = g.n_points;
	const auto& ref = engine.reference();
	SpatialDensity d;
	d.t = t;
	d.x = g.positions();
	d.electron.assign(n, 0.0);
	d.positron.assign(n, 0.0);
	if(t == 0.0) return d;
	auto G = engine.amplitudes(t).G;
	Eigen::MatrixXcd pe = ref.positive * G;
	Eigen::MatrixXcd pp = ref.negative * engine.positron_block(t);
	const double inv_dx = 1.0 / g.dx();
	Eigen::VectorXd re = pe.cwiseAbs2().rowwise().sum();
	Eigen::VectorXd rp = pp.cwiseAbs2().rowwise().sum();
	for(std::int64_t j = 0; j < n; ++j) {
		d.electron[j] = (re(j) + re(n + j)) * inv_dx;
		d.positron[j] = (rp(j) + rp(n + j)) * inv_dx;
	}
	return d;
}

double center_of_mass(const std::vector<double>& x, const std::vector<double>& rho)
{
	double m = 0, mx = 0;
	for(std::size_t i = 0; i < x.size(); ++i) {
		m += rho[i];
		mx += rho[i] * x[i];
	}
	return m > 0 ? mx / m : 0.0;
}

Emd2D assemble_emd2d(std::vector<EmdRow> rows)
{
	if(rows.empty()) throw std::invalid_argument("assemble_emd2d: no channels");
	std::stable_sort(rows.begin(), rows.end(), [](const EmdRow& a, const EmdRow& b) { return a.p_parallel < b.p_parallel; });
	Emd2D m;
	m.p_perp = rows.front().p_perp;
	m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.p_perp.size()));
	for(std::size_t r = 0; r < rows.size(); ++r) {
		if(rows[r].p_perp != m.p_perp || rows[r].rho.size() != m.p_perp.size())
			throw std::invalid_argument("assemble_emd2d: channels do not share one grid");
		if(r > 0 && rows[r].p_parallel == rows[r - 1].p_parallel)
			throw std::invalid_argument("assemble_emd2d: duplicate channel");
		m.p_parallel.push_back(rows[r].p_parallel);
		for(std::size_t c = 0; c < m.p_perp.size(); ++c) m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].rho[c];
	}
	return m;
}

Emd2D Emd2D::normalized() const
{
	Emd2D out = *this;
	double mx = values.maxCoeff();
	if(mx > 0) out.values /= mx;
	return out;
}

Eigen::Index Emd2D::most_probable_row() const
{
	Eigen::Index r;
	values.rowwise().sum().maxCoeff(&r);
	return r;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& N, double t_lo, double t_hi)
{
	if(t.size() != N.size()) throw std::invalid_argument("fit_rate: size mismatch");
	std::vector<double> ts, ns;
	for(std::size_t i = 0; i < t.size(); ++i)
		if(t[i] >= t_lo && t[i] <= t_hi) {
			ts.push_back(t[i]);
			ns.push_back(N[i]);
		}
	if(ts.size() < 10) throw std::invalid_argument("fit_rate: fewer than 10 samples in the fit window");
	const double n = static_cast<double>(ts.size());
	double mt = 0, mn = 0;
	for(std::size_t i = 0; i < ts.size(); ++i) {
		mt += ts[i];
		mn += ns[i];
	}
	mt /= n;
	mn /= n;
	double stt = 0, stn = 0;
	for(std::size_t i = 0; i < ts.size(); ++i) {
		stt += (ts[i] - mt) * (ts[i] - mt);
		stn += (ts[i] - mt) * (ns[i] - mn);
	}
	if(!(stt > 1e-12 * (1 + mt * mt) * n)) throw std::invalid_argument("fit_rate: ill-conditioned fit (no spread in t)");
	RateFit f;
	f.samples = ts.size();
	f.rate = stn / stt;
	f.intercept = mn - f.rate * mt;
	double ss = 0, lo = ns.front(), hi = ns.front();
	for(std::size_t i = 0; i < ts.size(); ++i) {
		double r = ns[i] - (f.intercept + f.rate * ts[i]);
		ss += r * r;
		lo = std::min(lo, ns[i]);
		hi = std::max(hi, ns[i]);
	}
	double rms = std::sqrt(ss / n);
	f.rate_error = n > 2 ? std::sqrt(ss / (n - 2) / stt) : 0.0;
	f.residual = hi > lo ? rms / (hi - lo) : rms;
	return f;
}

double fringe_contrast(const std::vector<double>& E, const std::vector<double>& rho, double lo, double hi)
{
	std::vector<double> y;
	for(std::size_t i = 0; i < E.size(); ++i)
		if(E[i] >= lo && E[i] <= hi) y.push_back(rho[i]);
	if(y.empty()) throw std::invalid_argument("fringe_contrast: empty window");
	double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
	bool any = false;
	for(std::size_t i = 1; i + 1 < y.size(); ++i) {
		bool peak = y[i] > y[i - 1] && y[i] > y[i + 1];
		bool dip = y[i] < y[i - 1] && y[i] < y[i + 1];
		if(peak || dip) {
			any = true;
			mx = std::max(mx, y[i]);
			mn = std::min(mn, y[i]);
		}
	}
	if(!any || mx + mn <= 0) return 0.0;
	return (mx - mn) / (mx + mn);
}

Support support_of(const std::vector<double>& v, double fraction)
{
	Support s;
	s.mask.assign(v.size(), false);
	if(v.empty()) return s;
	double mx = *std::max_element(v.begin(), v.end());
	if(!(mx > 0)) return s;
	double thr = fraction * mx;
	for(std::size_t i = 0; i < v.size(); ++i) {
		if(v[i] > thr) {
			s.mask[i] = true;
			if(s.empty) s.first = i;
			s.last = i;
			s.empty = false;
		}
	}
	return s;
}

TimeResolvedSpectrum time_resolved_spectrum(const std::vector<double>& times,
                                            const std::vector<std::vector<double>>& rho_k_by_time,
                                            const std::vector<double>& k, double p, double box_length,
                                            const std::vector<double>& edges, Branch branch, SpectralNormalization norm)
{
	if(times.size() != rho_k_by_time.size()) throw std::invalid_argument("time_resolved_spectrum: size mismatch");
	for(std::size_t i = 1; i < times.size(); ++i)
		if(!(times[i] > times[i - 1])) throw std::invalid_argument("time_resolved_spectrum: times must increase");
	TimeResolvedSpectrum s;
	s.times = times;
	s.edges = edges;
	for(const auto& r : rho_k_by_time) s.rho.push_back(binned_energy_spectrum(r, k, p, box_length, edges, branch, norm));
	return s;
}

TimeResolvedSpectrum production_spectrum(const TimeResolvedSpectrum& s, double t_ref)
{
	std::size_t ref = s.times.size();
	for(std::size_t i = 0; i < s.times.size(); ++i)
		if(std::abs(s.times[i] - t_ref) <= 1e-9 * std::max(1.0, t_ref)) ref = i;
	if(ref == s.times.size()) throw std::invalid_argument("production_spectrum: reference time not sampled");
	TimeResolvedSpectrum out;
	out.edges = s.edges;
	for(std::size_t i = ref + 1; i < s.times.size(); ++i) {
		out.times.push_back(s.times[i]);
		std::vector<double> row(s.rho[i].size());
		for(std::size_t b = 0; b < row.size(); ++b) row[b] = s.rho[i][b] - s.rho[ref][b];
		out.rho.push_back(std::move(row));
	}
	return out;
}

std::vector<double> uniform_edges(double lo, double hi, double width)
{
	auto n = static_cast<std::size_t>(std::llround((hi - lo) / width));
	if(n < 1) throw std::invalid_argument("uniform_edges: empty range");
	std::vector<double> e(n + 1);
	for(std::size_t i = 0; i <= n; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
	return e;
}

} // namespace klein
