#include "klein/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace klein {

Config with_case(const Config& in, CaseTag tag)
{
	Config c = to_natural_units(in);
	auto& f = c.fields;
	f.case_tag = tag;
	switch(tag) {
	case CaseTag::I:
		f.e_A0 = 0.0;
		f.x_B = 0.0;
		break;
	case CaseTag::II: f.x_B = f.L; break;
	case CaseTag::III: f.x_B = -f.L; break;
	}
	if(tag != CaseTag::I && f.e_A0 == 0.0) throw ConfigError("fields.e_A0: Case " + to_string(tag) + " needs a vector step");
	return in.fields.units == UnitSystem::atomic ? to_atomic_units(c) : c;
}

std::vector<double> sample_times(double t_max, double t_step)
{
	if(!(t_step > 0)) throw std::invalid_argument("sample_times: step must be positive");
	auto n = static_cast<std::int64_t>(std::floor(t_max / t_step + 1e-9));
	std::vector<double> t(n + 1);
	for(std::int64_t i = 0; i <= n; ++i) t[i] = t_step * static_cast<double>(i);
	return t;
}

std::vector<std::size_t> subset_positions(const std::vector<double>& times, const std::vector<double>& subset)
{
	std::vector<std::size_t> pos;
	std::size_t i = 0;
	for(double t : subset) {
		while(i < times.size() && times[i] < t - 1e-9 * std::max(1.0, std::abs(t))) ++i;
		if(i == times.size() || std::abs(times[i] - t) > 1e-9 * std::max(1.0, std::abs(t)))
			throw std::invalid_argument("spectrum time " + std::to_string(t) + " is not a sample time");
		pos.push_back(i++);
	}
	return pos;
}

std::vector<double> ChannelResult::rho_row(std::size_t i) const
{
	Eigen::VectorXd r = rho_k.row(static_cast<Eigen::Index>(i));
	return {r.data(), r.data() + r.size()};
}

ChannelResult run_channel(const Config& cfg, CaseTag tag, double p, int spin, const ChannelOptions& opt)
{
	auto start = std::chrono::steady_clock::now();
	Config c = to_natural_units(with_case(cfg, tag));
	double t_end = opt.times.empty() ? 0.0 : opt.times.back();
	validate_grid(c.grid, c.fields, t_end);
	for(std::size_t i = 1; i < opt.times.size(); ++i)
		if(!(opt.times[i] > opt.times[i - 1])) throw std::invalid_argument("run_channel: times must increase");

	Channel ch{p, spin};
	auto H = build_hamiltonian(c.grid, ch, c.fields);
	auto basis = build_free_basis(c.grid, ch);
	auto ref = reference_for(H, basis);
	auto order = basis.ascending_order();
	const auto n = c.grid.n_points;

	ChannelResult res;
	res.case_tag = tag;
	res.p_parallel = p;
	res.spin = spin;
	res.grid = c.grid;
	res.times = opt.times;
	res.spectrum_times = opt.spectrum_times.empty() ? opt.times : opt.spectrum_times;
	auto spectral = subset_positions(res.times, res.spectrum_times);
	res.k.resize(n);
	for(std::int64_t i = 0; i < n; ++i) res.k[i] = basis.k[order[i]];
	res.rho_k.resize(static_cast<Eigen::Index>(res.spectrum_times.size()), n);

	auto record_spectrum = [&](std::size_t row, const BogoliubovAmplitudes& G) {
		auto rk = momentum_spectrum(G, ref);
		for(std::int64_t j = 0; j < n; ++j) res.rho_k(static_cast<Eigen::Index>(row), j) = rk[order[j]];
	};

	if(opt.backend == Backend::eigen) {
		auto spec = diagonalize(H.dense(), "case " + to_string(tag) + " p=" + std::to_string(p));
		BogoliubovEngine engine(spec, ref, ch);
		res.number = engine.number_series(opt.times);
		for(std::size_t row = 0; row < res.spectrum_times.size(); ++row)
			record_spectrum(row, engine.amplitudes(res.spectrum_times[row]));
		for(double t : opt.density_times) res.densities.push_back(spatial_density(engine, c.grid, t));
	} else {
		std::size_t row = 0;
		Eigen::MatrixXcd psi = ref.negative;
		double t_now = 0.0;
		for(std::size_t i = 0; i < opt.times.size(); ++i) {
			double span = opt.times[i] - t_now;
			auto steps = static_cast<std::int64_t>(std::llround(span / opt.dt));
			if(std::abs(static_cast<double>(steps) * opt.dt - span) > 1e-9 * std::max(1.0, span))
				throw std::invalid_argument("run_channel: sample times are not multiples of dt");
			if(steps > 0)
				for(Eigen::Index col = 0; col < psi.cols(); ++col)
					psi.col(col) = evolve_split_operator(H, psi.col(col), opt.dt, steps);
			t_now = opt.times[i];
			BogoliubovAmplitudes G;
			G.t = t_now;
			G.channel = ch;
			G.G = ref.positive.adjoint() * psi;
			res.number.push_back(particle_number(G));
			if(row < spectral.size() && spectral[row] == i) record_spectrum(row++, G);
		}
	}
	res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
	return res;
}

} // namespace klein
